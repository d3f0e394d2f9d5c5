#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>

namespace pvgap {

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Writes to a sibling temporary file and renames it over `path`, so a
/// reader never observes a partially written file.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

std::string read_file(const std::filesystem::path& path);

/// printf-style %.<digits>g in the "C" locale.
std::string format_g(double value, int digits);

/// Rounds to `digits` significant decimal digits (the value %.<digits>g prints).
double round_sig(double value, int digits);

} // namespace pvgap
