#include "opcert/report.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

namespace opcert {

void write_text_atomic(const std::string& path, const std::string& text) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw NumericalError("cannot open '" + tmp.string() + "' for writing");
    out << text;
  }
  fs::rename(tmp, target);
}

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void write_spectra_csv(const std::string& path, const std::vector<SpectrumRow>& rows) {
  std::string out = "index,eigenvalue,domain_tag\n";
  char buf[64];
  for (const SpectrumRow& r : rows) {
    std::snprintf(buf, sizeof buf, "%ld,%.17g,", r.index, r.eigenvalue);
    out += buf;
    out += r.domain_tag;
    out += '\n';
  }
  write_text_atomic(path, out);
}

}  // namespace opcert
