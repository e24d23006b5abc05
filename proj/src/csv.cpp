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

#include "creq/csv.hpp"

namespace creq::csv {

std::optional<Row> Reader::next() {
    Row row;
    std::string field;
    bool in_quotes = false;
    bool any = false;
    row_line_ = physical_line_;
    int ch = 0;
    while ((ch = in_.get()) != std::char_traits<char>::eof()) {
        any = true;
        const char c = static_cast<char>(ch);
        if (in_quotes) {
            if (c == '"') {
                if (in_.peek() == '"') {
                    in_.get();
                    field.push_back('"');
                } else {
                    in_quotes = false;
                }
            } else {
                if (c == '\n') ++physical_line_;
                field.push_back(c);
            }
            continue;
        }
        if (c == '"') {
            in_quotes = true;
        } else if (c == ',') {
            row.push_back(std::move(field));
            field.clear();
        } else if (c == '\r') {
            // CRLF: the '\n' terminates the row
        } else if (c == '\n') {
            ++physical_line_;
            row.push_back(std::move(field));
            return row;
        } else {
            field.push_back(c);
        }
    }
    if (!any) return std::nullopt;
    row.push_back(std::move(field));
    return row;
}

Header::Header(const Row& names) {
    for (std::size_t i = 0; i < names.size(); ++i) {
        std::string name = names[i];
        // tolerate a UTF-8 byte order mark on the first column
        if (i == 0 && name.size() >= 3 && name.compare(0, 3, "\xEF\xBB\xBF") == 0) name.erase(0, 3);
        index_.emplace(std::move(name), i);
    }
}

bool Header::has(std::string_view name) const { return index_.find(name) != index_.end(); }

std::string Header::get(const Row& row, std::string_view name) const {
    const auto it = index_.find(name);
    if (it == index_.end() || it->second >= row.size()) return {};
    return row[it->second];
}

std::string quote(std::string_view field) {
    if (field.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(field);
    std::string out = "\"";
    for (const char c : field) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

void write_row(std::ostream& out, const Row& row) {
    for (std::size_t i = 0; i < row.size(); ++i) {
        if (i != 0) out << ',';
        out << quote(row[i]);
    }
    out << '\n';
}

}  // namespace creq::csv
