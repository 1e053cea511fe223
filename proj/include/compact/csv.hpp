// Copyright (C) 2026 The compact-cascade authors
// SPDX-License-Identifier: Apache-2.0
//
// Minimal RFC 4180 reader/writer used for datasets, score files and reports.
#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace compact::csv {

using Row = std::vector<std::string>;

/// Parses a whole document. Accepts CRLF or LF line endings, quoted fields with
/// embedded commas, newlines and doubled quotes. A trailing newline does not
/// produce an empty row. Throws SchemaError("line N", ...) on an unterminated quote.
std::vector<Row> parse(std::string_view text);

/// Quotes a field only when it contains a comma, quote, CR or LF.
std::string escape(std::string_view field);
std::string format_row(const Row& row);

/// Shortest decimal that parses back to exactly `v`.
std::string format_double(double v);
/// Strict parse of a whole field as a double; throws InvalidInput.
double parse_double(std::string_view s);

}  // namespace compact::csv
