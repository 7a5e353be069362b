#include "chaintag/address.hpp"

#include "chaintag/error.hpp"

namespace chaintag {

bool CurrencyProfile::is_valid(std::string_view text) const noexcept {
    if (text.size() < min_length || text.size() > max_length) return false;
    bool prefixed = false;
    for (const auto& p : prefixes) {
        if (text.starts_with(p)) {
            prefixed = true;
            break;
        }
    }
    if (!prefixed) return false;
    for (char c : text)
        if (!in_alphabet(c)) return false;
    return true;
}

const CurrencyProfile& CurrencyProfile::bitcoin() {
    static const CurrencyProfile p{"bitcoin", {"1", "3"}};
    return p;
}

const CurrencyProfile& CurrencyProfile::litecoin() {
    static const CurrencyProfile p{"litecoin", {"L", "M", "3"}};
    return p;
}

const CurrencyProfile& CurrencyProfile::namecoin() {
    static const CurrencyProfile p{"namecoin", {"M", "N"}, std::string{kBase58Alphabet}, 34, 34};
    return p;
}

const CurrencyProfile& CurrencyProfile::zcash() {
    static const CurrencyProfile p{"zcash", {"t1", "t3"}, std::string{kBase58Alphabet}, 35, 35};
    return p;
}

const CurrencyProfile& CurrencyProfile::by_name(std::string_view name) {
    if (name == "bitcoin") return bitcoin();
    if (name == "litecoin") return litecoin();
    if (name == "namecoin") return namecoin();
    if (name == "zcash") return zcash();
    throw ValidationError("currency", "unknown currency profile '" + std::string(name) + "'");
}

}  // namespace chaintag
