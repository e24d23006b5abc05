// Copyright 2026 The creq Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef CREQ_CSV_HPP
#define CREQ_CSV_HPP

#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace creq::csv {

using Row = std::vector<std::string>;

/// RFC 4180 reader: quoted fields, doubled quotes, embedded newlines.
/// `line` is set to the 1-based physical line on which each row started.
class Reader {
public:
    explicit Reader(std::istream& in) : in_(in) {}

    /// Reads the next row; std::nullopt at end of input.
    std::optional<Row> next();

    [[nodiscard]] std::size_t line() const noexcept { return row_line_; }

private:
    std::istream& in_;
    std::size_t physical_line_ = 1;
    std::size_t row_line_ = 0;
};

/// Header-indexed view of a row.
class Header {
public:
    explicit Header(const Row& names);

    [[nodiscard]] bool has(std::string_view name) const;
    /// Field value, or empty string when the column is absent or the row is short.
    [[nodiscard]] std::string get(const Row& row, std::string_view name) const;

private:
    std::map<std::string, std::size_t, std::less<>> index_;
};

std::string quote(std::string_view field);
void write_row(std::ostream& out, const Row& row);

}  // namespace creq::csv

#endif  // CREQ_CSV_HPP
