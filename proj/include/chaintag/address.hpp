#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace chaintag {

inline constexpr std::string_view kBase58Alphabet =
    "123456789ABCDEFGHJKLMNPQRSTUVWXYZabcdefghijkmnopqrstuvwxyz";

// Address shape for one currency: allowed leading prefixes, the body alphabet and the total
// length range. Matching is by shape only; checksums are not verified.
struct CurrencyProfile {
    std::string name;
    std::vector<std::string> prefixes;
    std::string alphabet{kBase58Alphabet};
    std::size_t min_length = 26;
    std::size_t max_length = 35;

    bool in_alphabet(char c) const noexcept { return alphabet.find(c) != std::string::npos; }
    bool is_valid(std::string_view text) const noexcept;

    static const CurrencyProfile& bitcoin();
    static const CurrencyProfile& litecoin();
    static const CurrencyProfile& namecoin();
    static const CurrencyProfile& zcash();
    // Throws ValidationError for an unknown name.
    static const CurrencyProfile& by_name(std::string_view name);
};

}  // namespace chaintag
