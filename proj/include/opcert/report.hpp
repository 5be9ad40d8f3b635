#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "opcert/common.hpp"

namespace opcert {

using Json = nlohmann::ordered_json;

// Atomic write: temp file in the same directory, then rename.
void write_text_atomic(const std::string& path, const std::string& text);

std::string fnv1a_hex(const std::string& text);

struct SpectrumRow {
  long index;
  double eigenvalue;
  std::string domain_tag;
};

// spectra.csv with the fixed header "index,eigenvalue,domain_tag".
void write_spectra_csv(const std::string& path, const std::vector<SpectrumRow>& rows);

}  // namespace opcert
