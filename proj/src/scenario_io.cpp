#include "llgeo/scenario_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace llgeo {

namespace {

using nlohmann::json;

std::string strip_comment_lines(const std::string& text) {
    std::string out;
    out.reserve(text.size());
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        const auto first = line.find_first_not_of(" \t\r");
        if (first != std::string::npos && line[first] == '#') continue;
        out += line;
        out += '\n';
    }
    return out;
}

double num(const json& j, const char* key, double fallback) {
    if (!j.contains(key)) return fallback;
    if (!j[key].is_number()) throw ConfigError(std::string(key) + " must be a number");
    return j[key].get<double>();
}

Rect rect_of(const json& j, const char* what) {
    if (!j.is_object()) throw ConfigError(std::string(what) + " must be an object");
    for (const char* k : {"xmin", "ymin", "xmax", "ymax"})
        if (!j.contains(k) || !j[k].is_number())
            throw ConfigError(std::string(what) + " needs numeric " + k);
    return Rect{j["xmin"].get<double>(), j["ymin"].get<double>(), j["xmax"].get<double>(),
                j["ymax"].get<double>()};
}

}  // namespace

Scenario parse_scenario_json(const std::string& text) {
    json j;
    try {
        j = json::parse(strip_comment_lines(text));
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("invalid scenario JSON: ") + e.what(), 0);
    }
    if (!j.is_object()) throw ConfigError("scenario config must be a JSON object");

    static const char* known[] = {"antennas", "obstacles", "model",   "noise_std",
                                  "top_k",    "rng_seed",  "extent"};
    for (const auto& [key, _] : j.items()) {
        bool ok = false;
        for (const char* k : known) ok = ok || key == k;
        if (!ok) throw ConfigError("unknown scenario key: " + key);
    }

    Scenario sc;
    if (!j.contains("antennas") || !j["antennas"].is_array() || j["antennas"].empty())
        throw ConfigError("scenario needs a non-empty 'antennas' array");
    for (const auto& a : j["antennas"]) {
        if (!a.is_object() || !a.contains("id") || !a["id"].is_number_integer() ||
            !a.contains("x") || !a["x"].is_number() || !a.contains("y") ||
            !a["y"].is_number())
            throw ConfigError("each antenna needs integer id and numeric x, y");
        sc.antennas.push_back(
            Antenna{a["id"].get<int>(), Point(a["x"].get<double>(), a["y"].get<double>())});
    }
    if (j.contains("obstacles")) {
        if (!j["obstacles"].is_array()) throw ConfigError("'obstacles' must be an array");
        for (const auto& o : j["obstacles"]) {
            Obstacle ob;
            ob.rect = rect_of(o, "obstacle");
            ob.penalty = num(o, "penalty", 20.0);
            sc.obstacles.push_back(ob);
        }
    }
    if (j.contains("model")) {
        const auto& m = j["model"];
        if (!m.is_object()) throw ConfigError("'model' must be an object");
        sc.model.tx_power = num(m, "tx_power", sc.model.tx_power);
        sc.model.pl0 = num(m, "pl0", sc.model.pl0);
        sc.model.exponent = num(m, "exponent", sc.model.exponent);
        sc.model.d0 = num(m, "d0", sc.model.d0);
    }
    sc.noise_std = num(j, "noise_std", sc.noise_std);
    if (j.contains("top_k")) {
        if (!j["top_k"].is_number_integer()) throw ConfigError("top_k must be an integer");
        sc.top_k = j["top_k"].get<int>();
    }
    if (j.contains("rng_seed")) {
        if (!j["rng_seed"].is_number_integer())
            throw ConfigError("rng_seed must be an integer");
        sc.rng_seed = j["rng_seed"].get<std::uint64_t>();
    }
    if (j.contains("extent")) sc.extent = rect_of(j["extent"], "extent");
    sc.normalize();
    return sc;
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open scenario file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_scenario_json(buf.str());
}

std::string scenario_to_json(const Scenario& sc) {
    json j;
    j["antennas"] = json::array();
    for (const auto& a : sc.antennas)
        j["antennas"].push_back({{"id", a.id}, {"x", a.position.x()}, {"y", a.position.y()}});
    j["obstacles"] = json::array();
    for (const auto& o : sc.obstacles)
        j["obstacles"].push_back({{"xmin", o.rect.xmin},
                                  {"ymin", o.rect.ymin},
                                  {"xmax", o.rect.xmax},
                                  {"ymax", o.rect.ymax},
                                  {"penalty", o.penalty}});
    j["model"] = {{"tx_power", sc.model.tx_power},
                  {"pl0", sc.model.pl0},
                  {"exponent", sc.model.exponent},
                  {"d0", sc.model.d0}};
    j["noise_std"] = sc.noise_std;
    j["top_k"] = sc.top_k;
    j["rng_seed"] = sc.rng_seed;
    j["extent"] = {{"xmin", sc.extent.xmin},
                   {"ymin", sc.extent.ymin},
                   {"xmax", sc.extent.xmax},
                   {"ymax", sc.extent.ymax}};
    return j.dump(2) + "\n";
}

void save_scenario(const std::string& path, const Scenario& sc) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open output file: " + path);
    out << scenario_to_json(sc);
    out.flush();
    if (!out) throw IoError("write failed: " + path);
}

}  // namespace llgeo
