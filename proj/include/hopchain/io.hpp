#pragma once

#include <cstdint>
#include <fstream>
#include <functional>
#include <iosfwd>
#include <string>
#include <string_view>

namespace hopchain::io {

/// Throws IoError when the file cannot be opened.
std::ifstream open_input(const std::string& path);

/// Writes through `emit` into `<path>.tmp`, then renames over `path`.
void write_atomic(const std::string& path, const std::function<void(std::ostream&)>& emit);

/// 17 significant digits (%.17g); parses back to the identical double.
std::string format_double(double v);

/// 64-bit FNV-1a. Stable across platforms; used for digests and seed fan-out.
std::uint64_t fnv1a64(std::string_view data, std::uint64_t basis = 0xcbf29ce484222325ULL);

std::string hex64(std::uint64_t v);

}  // namespace hopchain::io
