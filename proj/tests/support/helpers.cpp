#include "helpers.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

#ifndef CHAINTAG_FIXTURE_DIR
#error "CHAINTAG_FIXTURE_DIR must be defined"
#endif

namespace testsupport {

std::filesystem::path fixture(const std::string& relative) {
    return std::filesystem::path(CHAINTAG_FIXTURE_DIR) / relative;
}

std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

chaintag::Chain chain_from_text(const std::string& jsonl) {
    std::istringstream in(jsonl);
    return chaintag::Chain::ingest(in);
}

TempDir::TempDir() {
    std::string templ = (std::filesystem::temp_directory_path() / "chaintag-test-XXXXXX").string();
    if (!mkdtemp(templ.data())) throw std::runtime_error("mkdtemp failed");
    path_ = templ;
}

TempDir::~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
}

std::filesystem::path TempDir::copy(const std::string& fixture_relative) const {
    auto dst = path_ / std::filesystem::path(fixture_relative).filename();
    std::filesystem::copy_file(fixture(fixture_relative), dst, std::filesystem::copy_options::overwrite_existing);
    return dst;
}

}  // namespace testsupport
