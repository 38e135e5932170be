#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace detect::csv {

using Record = std::vector<std::string>;

/// Parses RFC 4180 text: comma separated, double-quote quoting with "" escapes,
/// CRLF or LF record ends, embedded newlines inside quotes. A leading UTF-8 BOM
/// is skipped. A trailing newline does not produce an empty record.
/// Throws InputError on an unterminated quoted field.
std::vector<Record> parse(std::string_view text);

/// Reads and parses a file. Throws InputError if it cannot be opened.
std::vector<Record> read_file(const std::filesystem::path& path);

/// Quotes a field only when it contains a comma, quote, CR or LF.
std::string escape(std::string_view field);

void write_file(const std::filesystem::path& path, const std::vector<Record>& records);

}  // namespace detect::csv
