#pragma once

#include <string>
#include <string_view>

#include "fpt/text/document.hpp"

namespace fpt::text {

/// Word characters are ASCII alphanumerics and any non-ASCII byte, so UTF-8
/// words stay whole.
bool is_word_char(unsigned char c);
bool is_word_token(std::string_view token);

/// Splits sentences after '.', '!' or '?' when followed by whitespace or end of
/// text. Tokens are lowercased maximal runs of word characters or single
/// punctuation characters. Sentences without words are folded into a
/// neighbouring sentence. Throws EmptyDocumentError when there is no word.
TokenizedDoc tokenize(std::string_view raw_text);

/// Space-joined rendering that tokenizes back to the same TokenizedDoc.
std::string join(const TokenizedDoc& doc);

}  // namespace fpt::text
