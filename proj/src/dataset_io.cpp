#include "llgeo/dataset_io.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <string_view>

#include "llgeo/common.hpp"

namespace llgeo {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

LocatedSample parse_line(std::string_view line, std::size_t lineno) {
    LocatedSample s;
    std::size_t c1 = line.find(',');
    std::size_t c2 = c1 == std::string_view::npos ? c1 : line.find(',', c1 + 1);
    std::size_t c3 = c2 == std::string_view::npos ? c2 : line.find(',', c2 + 1);
    if (c3 == std::string_view::npos)
        throw ParseError("expected 'id,x,y,readings'", lineno);
    s.id = parse_int(line.substr(0, c1), lineno, "sample id");
    s.position.x() = parse_double(line.substr(c1 + 1, c2 - c1 - 1), lineno, "x");
    s.position.y() = parse_double(line.substr(c2 + 1, c3 - c2 - 1), lineno, "y");
    if (!s.position.allFinite()) throw ParseError("non-finite position", lineno);
    s.measurement = parse_readings(line.substr(c3 + 1), lineno);
    return s;
}

}  // namespace

Measurement parse_readings(std::string_view text, std::size_t lineno) {
    Measurement m;
    if (text.empty()) throw ParseError("sample has no readings", lineno);
    std::string_view rest = text;
    while (!rest.empty()) {
        std::size_t semi = rest.find(';');
        std::string_view tok = rest.substr(0, semi);
        rest = semi == std::string_view::npos ? std::string_view{} : rest.substr(semi + 1);
        std::size_t colon = tok.find(':');
        if (colon == std::string_view::npos || colon == 0 || colon + 1 == tok.size())
            throw ParseError("expected 'aid:rss' reading, got '" + std::string(tok) + "'",
                             lineno);
        const int aid =
            static_cast<int>(parse_int(tok.substr(0, colon), lineno, "antenna id"));
        const double rss = parse_double(tok.substr(colon + 1), lineno, "rss");
        if (!std::isfinite(rss)) throw ParseError("non-finite RSS", lineno);
        if (!m.readings.emplace(aid, rss).second)
            throw ParseError("duplicate antenna id " + std::to_string(aid) + " in readings",
                             lineno);
    }
    return m;
}

std::vector<LocatedSample> ingest_samples(std::istream& in) {
    std::vector<LocatedSample> out;
    std::string raw;
    std::size_t lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        std::string_view line = trim(raw);
        if (line.empty() || line.front() == '#') continue;
        out.push_back(parse_line(line, lineno));
    }
    return out;
}

std::vector<LocatedSample> load_samples(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open sample file: " + path);
    return ingest_samples(in);
}

void write_samples(std::ostream& out, const std::vector<LocatedSample>& samples) {
    for (const auto& s : samples) {
        out << s.id << ',' << format_double(s.position.x()) << ','
            << format_double(s.position.y()) << ',';
        bool first = true;
        for (const auto& [aid, rss] : s.measurement.readings) {
            if (!first) out << ';';
            first = false;
            out << aid << ':' << format_double(rss);
        }
        out << '\n';
    }
}

void save_samples(const std::string& path, const std::vector<LocatedSample>& samples) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open output file: " + path);
    write_samples(out, samples);
    out.flush();
    if (!out) throw IoError("write failed: " + path);
}

}  // namespace llgeo
