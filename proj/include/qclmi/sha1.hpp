#pragma once

#include <string>
#include <string_view>

namespace qclmi {

std::string sha1_hex(std::string_view data);

// Git-style blob hash: sha1("blob <len>\0" + content).
std::string git_blob_sha1(std::string_view content);

}  // namespace qclmi
