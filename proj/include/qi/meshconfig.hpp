#pragma once

#include <fstream>

#include <json.hpp>

#include "qi/mesh.hpp"

namespace qi {

namespace detail {

inline void reject_unknown(const nlohmann::json& j, std::initializer_list<const char*> keys,
                           const char* where) {
    if (!j.is_object()) throw config_error(std::string(where) + " must be a JSON object");
    for (const auto& [k, v] : j.items()) {
        bool ok = false;
        for (const char* key : keys) ok = ok || k == key;
        if (!ok) throw config_error(std::string("unknown key '") + k + "' in " + where);
    }
}

inline std::vector<double> knot_array(const nlohmann::json& j, const char* axis) {
    if (!j.is_array()) throw config_error(std::string("\"") + axis + "\" must be an array");
    std::vector<double> v;
    for (const auto& e : j) {
        if (!e.is_number()) throw config_error(std::string("\"") + axis + "\" must hold numbers");
        v.push_back(e.get<double>());
    }
    return v;
}

template <class T>
T field(const nlohmann::json& j, const char* key, const char* where) {
    if (!j.contains(key))
        throw config_error(std::string(where) + " is missing required key \"" + key + "\"");
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw config_error(std::string("key \"") + key + "\" in " + where + " has the wrong type");
    }
}

}  // namespace detail

// Mesh spec: {"x":[...],"y":[...]} | {"uniform":{"m","n","domain"?}} |
// {"random":{"m","n","gamma","seed"?}} (random meshes live on [0,1]^2).
inline CrissCrossMesh mesh_from_json(const nlohmann::json& j) {
    detail::reject_unknown(j, {"x", "y", "uniform", "random"}, "mesh spec");
    if (j.contains("x") || j.contains("y")) {
        if (!j.contains("x") || !j.contains("y") || j.size() != 2)
            throw config_error("explicit mesh spec needs exactly the keys \"x\" and \"y\"");
        return build_mesh(build_partition(detail::knot_array(j.at("x"), "x")),
                          build_partition(detail::knot_array(j.at("y"), "y")));
    }
    if (j.contains("uniform")) {
        if (j.size() != 1) throw config_error("\"uniform\" cannot be combined with other keys");
        const auto& u = j.at("uniform");
        detail::reject_unknown(u, {"m", "n", "domain"}, "\"uniform\"");
        int m = detail::field<int>(u, "m", "\"uniform\"");
        int n = detail::field<int>(u, "n", "\"uniform\"");
        Rect d{0, 1, 0, 1};
        if (u.contains("domain")) {
            auto a = detail::knot_array(u.at("domain"), "domain");
            if (a.size() != 4) throw config_error("\"domain\" must be [x0,x1,y0,y1]");
            d = {a[0], a[1], a[2], a[3]};
        }
        return build_mesh(uniform_partition(d.x0, d.x1, m), uniform_partition(d.y0, d.y1, n));
    }
    if (j.contains("random")) {
        if (j.size() != 1) throw config_error("\"random\" cannot be combined with other keys");
        const auto& r = j.at("random");
        detail::reject_unknown(r, {"m", "n", "gamma", "seed"}, "\"random\"");
        return random_mesh(detail::field<int>(r, "m", "\"random\""),
                           detail::field<int>(r, "n", "\"random\""),
                           detail::field<double>(r, "gamma", "\"random\""),
                           r.contains("seed") ? detail::field<std::uint64_t>(r, "seed", "\"random\"")
                                              : 0);
    }
    throw config_error("mesh spec needs \"x\"/\"y\", \"uniform\", or \"random\"");
}

inline nlohmann::json parse_json(const std::string& text, const char* what) {
    try {
        return nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw config_error(std::string("malformed JSON in ") + what + ": " + e.what());
    }
}

inline std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw config_error("cannot open '" + path + "'");
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

// Inline JSON if the argument starts with '{', otherwise a file path.
inline nlohmann::json json_from_arg(const std::string& arg, const char* what) {
    std::size_t k = arg.find_first_not_of(" \t\r\n");
    if (k != std::string::npos && arg[k] == '{') return parse_json(arg, what);
    return parse_json(read_text_file(arg), what);
}

inline CrissCrossMesh mesh_from_arg(const std::string& arg) {
    return mesh_from_json(json_from_arg(arg, "mesh spec"));
}

}  // namespace qi
