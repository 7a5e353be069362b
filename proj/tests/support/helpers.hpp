#pragma once

#include <filesystem>
#include <string>

#include "chaintag/chain.hpp"

namespace testsupport {

std::filesystem::path fixture(const std::string& relative);
std::string slurp(const std::filesystem::path& path);
chaintag::Chain chain_from_text(const std::string& jsonl);

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    TempDir();
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const noexcept { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }
    // Copies a fixture into the directory so the test may mutate it.
    std::filesystem::path copy(const std::string& fixture_relative) const;

private:
    std::filesystem::path path_;
};

}  // namespace testsupport
