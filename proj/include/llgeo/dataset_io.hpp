#ifndef LLGEO_DATASET_IO_HPP
#define LLGEO_DATASET_IO_HPP

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "llgeo/measurement.hpp"

namespace llgeo {

// Sample file grammar, one record per line:
//   id,x,y,aid:rss[;aid:rss]*
// Lines whose first non-blank character is '#' are comments; blank lines are
// skipped. Doubles are written in shortest round-trip form, so
// write -> ingest -> write is byte-identical.
std::vector<LocatedSample> ingest_samples(std::istream& in);
std::vector<LocatedSample> load_samples(const std::string& path);

// Parses the readings field alone ('aid:rss[;aid:rss]*'), also the grammar
// of the CLI's --q flag.
Measurement parse_readings(std::string_view text, std::size_t lineno = 0);

void write_samples(std::ostream& out, const std::vector<LocatedSample>& samples);
void save_samples(const std::string& path, const std::vector<LocatedSample>& samples);

}  // namespace llgeo

#endif
