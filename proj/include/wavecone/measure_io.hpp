#pragma once

// Field files for discrete measures and vertex-list files for polyhedral
// sets. Both formats are described byte for byte in docs/formats.md.

#include <iosfwd>
#include <string>

#include "wavecone/measure.hpp"

namespace wavecone {

enum class PayloadFormat { text, binary };

void write_measure(std::ostream& out, const DiscreteMeasure& mu, PayloadFormat format = PayloadFormat::text);
DiscreteMeasure read_measure(std::istream& in);

void save_measure(const std::string& path, const DiscreteMeasure& mu, PayloadFormat format = PayloadFormat::text);
DiscreteMeasure load_measure(const std::string& path);

void write_polyhedral_set(std::ostream& out, const PolyhedralSet& set);
PolyhedralSet read_polyhedral_set(std::istream& in);
PolyhedralSet load_polyhedral_set(const std::string& path);

}  // namespace wavecone
