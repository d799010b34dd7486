#pragma once

// Deterministic report emission: fixed float formatting, ordered keys,
// atomic writes.

#include <string>

namespace mdim {

std::string fmt_double(double v);
void write_file_atomic(const std::string& path, const std::string& content);

}  // namespace mdim
