#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace lemmarec::text {

// Decode UTF-8 to code points. Invalid bytes decode as U+FFFD.
std::vector<char32_t> decode_utf8(const std::string& s);

std::string encode_utf8(const std::vector<char32_t>& cps);

// Canonical composition (NFC) for the Latin subset this pipeline sees:
// ASCII base letters followed by combining marks U+0300..U+036F compose into
// their precomposed Latin-1 / Latin Extended-A forms where one exists.
// Sequences outside the table pass through unchanged.
std::string nfc_normalize(const std::string& s);

std::size_t count_code_points(const std::string& s);

}  // namespace lemmarec::text
