#include <unordered_set>

#include "chaintag/crawler.hpp"

namespace chaintag {

std::vector<std::string> extract_addresses(std::string_view text, const CurrencyProfile& profile) {
    std::vector<std::string> out;
    std::unordered_set<std::string_view> seen;
    std::size_t i = 0;
    while (i < text.size()) {
        if (!profile.in_alphabet(text[i])) {
            ++i;
            continue;
        }
        std::size_t start = i;
        while (i < text.size() && profile.in_alphabet(text[i])) ++i;
        std::string_view run = text.substr(start, i - start);
        if (profile.is_valid(run) && seen.insert(run).second) out.emplace_back(run);
    }
    return out;
}

}  // namespace chaintag
