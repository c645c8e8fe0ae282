#pragma once

#include <string>

namespace pushmpc {

// Writes content to a temporary file in the target directory and renames it
// into place, so readers never observe a partially written artifact.
void atomic_write_file(const std::string& path, const std::string& content);

std::string read_file(const std::string& path);

void ensure_parent_dir(const std::string& path);

}  // namespace pushmpc
