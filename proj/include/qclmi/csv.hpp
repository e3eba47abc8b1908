#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "qclmi/core.hpp"
#include "qclmi/flows.hpp"

namespace qclmi {

struct EmptyInput : std::runtime_error {
  explicit EmptyInput(const std::string& what) : std::runtime_error("EmptyInput: " + what) {}
};

// Entropy series CSV. Columns appear in the fixed order
//   t,S1_cl,S2_cl,I_cl,purity_check,mc_stderr,S1_q,S2_q,I_q,trunc_pop,I_ref,Icl_ref
// and a column is emitted only when at least one record engages it. A leading
// "# manifest: <name>" comment ties the file to its run manifest.
std::string entropy_csv_text(const EntropySeries& series, const std::string& manifest_name);
EntropySeries parse_entropy_csv(const std::string& text);

// Section CSV: q2,p2,seed_index,crossing_index.
std::string section_csv_text(const std::vector<SectionPoint>& points,
                             const std::string& manifest_name);
std::vector<SectionPoint> parse_section_csv(const std::string& text);

// True when the header names section columns rather than entropy columns.
bool is_section_csv(const std::string& text);

std::string read_file(const std::filesystem::path& path);

// Write-then-rename; readers never observe a partial file.
void atomic_write(const std::filesystem::path& path, const std::string& content);

}  // namespace qclmi
