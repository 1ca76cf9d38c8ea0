#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace rsmkit::csv {

using Row = std::vector<std::string>;

// RFC 4180 field: quoted when it contains a comma, quote, CR or LF.
std::string escape(std::string_view field);
std::string write_row(const Row& row);  // terminated by '\n'

// Parses a whole document. Accepts LF or CRLF; a trailing newline does not
// produce an empty row. Throws InvalidArgument on an unterminated quote.
std::vector<Row> parse(std::string_view text);

}  // namespace rsmkit::csv
