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

#include "creq/text.hpp"

#include <array>
#include <cctype>

namespace creq::text {

namespace {

bool is_word_byte(unsigned char c) { return std::isalnum(c) != 0 || c >= 0x80; }

bool is_space(unsigned char c) { return std::isspace(c) != 0; }

}  // namespace

std::string to_lower(std::string_view s) {
    std::string out(s);
    for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && is_space(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && is_space(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

std::vector<Token> tokenize(std::string_view text) {
    std::vector<Token> tokens;
    std::size_t i = 0;
    const std::size_t n = text.size();
    while (i < n) {
        const auto c = static_cast<unsigned char>(text[i]);
        if (is_space(c)) {
            ++i;
            continue;
        }
        if (is_word_byte(c)) {
            const std::size_t begin = i;
            while (i < n) {
                const auto d = static_cast<unsigned char>(text[i]);
                if (is_word_byte(d)) {
                    ++i;
                } else if (d == '\'' && i + 1 < n && i > begin &&
                           std::isalpha(static_cast<unsigned char>(text[i + 1])) != 0) {
                    ++i;
                } else {
                    break;
                }
            }
            tokens.push_back({to_lower(text.substr(begin, i - begin)), begin, i, TokenKind::word});
            continue;
        }
        tokens.push_back({std::string(1, static_cast<char>(c)), i, i + 1, TokenKind::punct});
        ++i;
    }
    return tokens;
}

std::vector<std::string> words(std::string_view text) {
    std::vector<std::string> out;
    for (auto& t : tokenize(text)) {
        if (t.kind == TokenKind::word) out.push_back(std::move(t.value));
    }
    return out;
}

std::string normalize_phrase(std::string_view phrase) {
    std::string out;
    bool pending_space = false;
    for (const char ch : trim(phrase)) {
        const auto c = static_cast<unsigned char>(ch);
        if (is_space(c)) {
            pending_space = true;
            continue;
        }
        if (pending_space && !out.empty()) out.push_back(' ');
        pending_space = false;
        out.push_back(static_cast<char>(std::tolower(c)));
    }
    return out;
}

namespace {

constexpr std::array kAbbreviations = {"e.g", "i.e", "etc", "vs", "dr", "mr", "mrs", "ms", "no",
                                       "fig", "cf", "approx", "resp", "sec", "ca", "st"};

bool is_abbreviation(std::string_view text, std::size_t dot) {
    // scan back over the word preceding the period (letters and inner dots)
    std::size_t b = dot;
    while (b > 0) {
        const auto c = static_cast<unsigned char>(text[b - 1]);
        if (std::isalpha(c) != 0 || c == '.') {
            --b;
        } else {
            break;
        }
    }
    const std::string word = to_lower(text.substr(b, dot - b));
    if (word.empty()) return false;
    if (word.size() == 1 && std::isupper(static_cast<unsigned char>(text[b])) != 0) return true;
    for (const char* a : kAbbreviations) {
        if (word == a) return true;
    }
    return false;
}

}  // namespace

std::vector<std::string> split_sentences(std::string_view text) {
    std::vector<std::string> out;
    std::size_t start = 0;
    const std::size_t n = text.size();
    auto flush = [&](std::size_t end) {
        const auto s = trim(text.substr(start, end - start));
        if (!s.empty()) out.emplace_back(s);
        start = end;
    };
    for (std::size_t i = 0; i < n; ++i) {
        const char c = text[i];
        if (c == '\n') {
            std::size_t j = i + 1;
            while (j < n && (text[j] == ' ' || text[j] == '\t' || text[j] == '\r')) ++j;
            if (j < n && text[j] == '\n') {
                flush(i);
                i = j;
            }
            continue;
        }
        if (c != '.' && c != '!' && c != '?') continue;
        std::size_t j = i + 1;
        while (j < n && (text[j] == '.' || text[j] == '!' || text[j] == '?' || text[j] == '"' ||
                         text[j] == '\'' || text[j] == ')')) {
            ++j;
        }
        if (j < n && !is_space(static_cast<unsigned char>(text[j]))) continue;
        std::size_t k = j;
        while (k < n && is_space(static_cast<unsigned char>(text[k]))) ++k;
        if (k < n) {
            const auto next = static_cast<unsigned char>(text[k]);
            if (std::isupper(next) == 0 && std::isdigit(next) == 0 && next != '"' && next != '(' &&
                next < 0x80) {
                continue;
            }
        }
        if (c == '.' && is_abbreviation(text, i)) continue;
        flush(j);
        i = j - 1;
    }
    flush(n);
    return out;
}

}  // namespace creq::text
