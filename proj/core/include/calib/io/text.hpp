#ifndef CALIB_IO_TEXT_HPP_
#define CALIB_IO_TEXT_HPP_

#include <filesystem>
#include <string>
#include <string_view>

namespace calib::io {

/// Whole file as bytes; throws Io naming the path on failure.
std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

/// Shortest decimal that parses back to the same double.
std::string format_double(double v);

/// Decimal or scientific notation; false unless the whole token is consumed.
/// Accepts "nan"/"inf" so callers can report them as non-finite.
bool parse_double(std::string_view token, double* out);
bool parse_int(std::string_view token, long long* out);

/// Token without surrounding spaces, tabs and carriage returns.
std::string_view trim(std::string_view s);

}  // namespace calib::io

#endif  // CALIB_IO_TEXT_HPP_
