#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "chaintag/graph.hpp"
#include "chaintag/tags.hpp"
#include "chaintag/time_util.hpp"

namespace testsupport {

using Rng = std::mt19937_64;

struct SynthOptions {
    std::size_t txs = 200;
    std::size_t addresses = 100;
    std::size_t txs_per_block = 5;
    int max_inputs = 3;
    int max_outputs = 3;
    double coinbase_ratio = 0.15;
    double repeat_input_ratio = 0.05;  // chance an input repeats an address already on that side
    chaintag::UnixTime start = 1356998400;  // 2013-01-01
    std::int64_t block_spacing = 86400 * 3;
};

std::vector<std::string> synth_addresses(Rng& rng, std::size_t n);
std::string random_hex(Rng& rng, std::size_t len = 64);

// One JSON object per line, in the ingestion format.
std::string synth_chain(Rng& rng, const SynthOptions& opt, const std::vector<std::string>& addresses);

chaintag::Tag synth_tag(Rng& rng);
// Tags for roughly `fraction` of the addresses, 1-3 tags each.
std::vector<std::pair<std::string, std::vector<chaintag::Tag>>> synth_tags(Rng& rng,
                                                                          const std::vector<std::string>& addresses,
                                                                          double fraction);

// Random weighted digraph; node labels "n0", "n1", ...
chaintag::TxGraph synth_graph(Rng& rng, std::size_t nodes, double edge_prob, std::int64_t max_weight = 1000,
                             bool self_loops = true);

// Random query over the documented grammar (transaction, address or block level).
chaintag::Json synth_query(Rng& rng, chaintag::Level level, const std::vector<std::string>& addresses);

}  // namespace testsupport
