// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <string_view>

namespace bugcause {

// Porter (1980) suffix-stripping stemmer. Input must already be lowercase;
// words shorter than 3 letters are returned unchanged.
std::string porter_stem(std::string_view word);

} // namespace bugcause
