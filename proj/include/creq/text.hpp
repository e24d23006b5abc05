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

#ifndef CREQ_TEXT_HPP
#define CREQ_TEXT_HPP

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace creq::text {

enum class TokenKind { word, punct };

/// A lowercase token with the byte span it covers in the source text.
struct Token {
    std::string value;
    std::size_t begin = 0;
    std::size_t end = 0;
    TokenKind kind = TokenKind::word;
};

/// Splits on whitespace and punctuation. Words are maximal runs of ASCII
/// letters/digits, apostrophes between letters, and any non-ASCII byte; they
/// are lowercased. Every other visible character becomes its own punct token.
std::vector<Token> tokenize(std::string_view text);

/// Word tokens only, lowercased; the unigram stream used for featurization.
std::vector<std::string> words(std::string_view text);

/// Lowercases, trims, and collapses internal whitespace to single spaces.
std::string normalize_phrase(std::string_view phrase);

std::string to_lower(std::string_view s);
std::string_view trim(std::string_view s);

/// Rule-based sentence splitter: a sentence ends at '.', '!' or '?' followed
/// by whitespace and an uppercase letter, digit, quote or end of text.
/// Common abbreviations (e.g., i.e., etc., vs., Dr., No.) and single capital
/// initials do not end a sentence. Blank-line paragraph breaks always do.
std::vector<std::string> split_sentences(std::string_view text);

}  // namespace creq::text

#endif  // CREQ_TEXT_HPP
