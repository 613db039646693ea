#ifndef RECOVGRAPH_CSVIO_HPP
#define RECOVGRAPH_CSVIO_HPP

#include <string>
#include <string_view>
#include <vector>

namespace recovgraph {

/// Shortest round-trip decimal form of a double ("0.1", not "0.10000000000000001").
std::string format_double(double v);

/// Splits one CSV line on commas, honouring double-quoted fields.
std::vector<std::string> csv_split(std::string_view line);

/// Quotes a field if it contains a comma, quote, or newline.
std::string csv_quote(std::string_view field);

/// Parses a double with '.' decimal separator, locale-independent.
/// `context` names the location (file, row) in the error message.
double parse_double(std::string_view text, const std::string& context);

/// Parses a non-negative integer; throws ParseError on anything else.
long parse_long(std::string_view text, const std::string& context);

} // namespace recovgraph

#endif
