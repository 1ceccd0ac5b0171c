#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace latent_split {

/// Splits one CSV record (RFC 4180 quoting, no embedded newlines).
/// Returns false on an unterminated quote.
bool split_csv_record(std::string_view line, std::vector<std::string>& fields);

/// Quotes a field when it contains a comma, quote or line break.
std::string csv_field(std::string_view value);

/// Shortest decimal form that round-trips to the same double.
std::string format_double(double value);

}  // namespace latent_split
