#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "fedrec/matrix.hpp"
#include "fedrec/rng.hpp"

#include "json.hpp"

namespace fedrec {

enum class Split : std::uint8_t { train = 0, valid = 1, test = 2 };

// One interaction after dense reindexing, owned by its user's list.
struct Interaction {
  std::uint32_t item = 0;
  double rating = 0.0;
  std::int64_t timestamp = 0;
  Split split = Split::train;
};

struct RawInteraction {
  std::int64_t user = 0;
  std::int64_t item = 0;
  double rating = 0.0;
  std::int64_t timestamp = 0;
};

struct InteractionDataset {
  std::size_t num_users = 0;
  std::size_t num_items = 0;
  std::vector<std::vector<Interaction>> by_user;
  bool has_timestamps = false;
  std::size_t duplicates_collapsed = 0;
  // Original identifiers, indexed by dense id (first-appearance order).
  std::vector<std::int64_t> user_ids;
  std::vector<std::int64_t> item_ids;

  std::size_t num_interactions() const {
    std::size_t n = 0;
    for (const auto& list : by_user) n += list.size();
    return n;
  }
};

namespace detail {

inline bool parse_int64(const std::string& s, std::int64_t& out) {
  if (s.empty()) return false;
  std::size_t pos = 0;
  try {
    out = std::stoll(s, &pos);
  } catch (...) {
    return false;
  }
  return pos == s.size();
}

inline bool parse_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  std::size_t pos = 0;
  try {
    out = std::stod(s, &pos);
  } catch (...) {
    return false;
  }
  return pos == s.size();
}

}  // namespace detail

// Builds a dense-indexed dataset from raw records. Duplicate (user, item)
// pairs collapse to the record with the latest timestamp (later input order
// wins ties); the collapse count is reported on the dataset.
inline InteractionDataset build_dataset(const std::vector<RawInteraction>& records,
                                        bool has_timestamps) {
  InteractionDataset ds;
  ds.has_timestamps = has_timestamps;
  std::unordered_map<std::int64_t, std::uint32_t> user_map, item_map;
  // (user, item) -> position in by_user[user]
  std::vector<std::unordered_map<std::uint32_t, std::size_t>> seen;
  for (const RawInteraction& r : records) {
    auto [uit, unew] = user_map.try_emplace(
        r.user, static_cast<std::uint32_t>(ds.user_ids.size()));
    if (unew) {
      ds.user_ids.push_back(r.user);
      ds.by_user.emplace_back();
      seen.emplace_back();
    }
    auto [iit, inew] = item_map.try_emplace(
        r.item, static_cast<std::uint32_t>(ds.item_ids.size()));
    if (inew) ds.item_ids.push_back(r.item);
    const std::uint32_t u = uit->second;
    const std::uint32_t v = iit->second;
    auto [sit, fresh] = seen[u].try_emplace(v, ds.by_user[u].size());
    if (fresh) {
      ds.by_user[u].push_back({v, r.rating, r.timestamp, Split::train});
    } else {
      ds.duplicates_collapsed += 1;
      Interaction& kept = ds.by_user[u][sit->second];
      if (r.timestamp >= kept.timestamp) {
        kept.rating = r.rating;
        kept.timestamp = r.timestamp;
      }
    }
  }
  ds.num_users = ds.user_ids.size();
  ds.num_items = ds.item_ids.size();
  return ds;
}

// Loads a UTF-8 TSV interaction file: `<user>\t<item>\t<rating>[\t<timestamp>]`
// per line, lines starting with `#` ignored. The only supported format tag is
// "tsv".
inline InteractionDataset load_dataset(const std::string& path,
                                       const std::string& format = "tsv") {
  if (format != "tsv")
    throw std::invalid_argument("load_dataset: unknown format '" + format + "'");
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_dataset: cannot open " + path);

  std::vector<RawInteraction> records;
  bool any_timestamp = false;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
      const std::size_t tab = line.find('\t', start);
      if (tab == std::string::npos) {
        fields.push_back(line.substr(start));
        break;
      }
      fields.push_back(line.substr(start, tab - start));
      start = tab + 1;
    }
    RawInteraction r;
    const bool shape_ok = fields.size() == 3 || fields.size() == 4;
    if (!shape_ok || !detail::parse_int64(fields[0], r.user) ||
        !detail::parse_int64(fields[1], r.item) ||
        !detail::parse_double(fields[2], r.rating) ||
        (fields.size() == 4 && !detail::parse_int64(fields[3], r.timestamp)))
      throw std::runtime_error("load_dataset: malformed line " +
                               std::to_string(line_no) + " in " + path);
    if (fields.size() == 4) any_timestamp = true;
    records.push_back(r);
  }
  if (records.empty())
    throw std::runtime_error("load_dataset: no interactions in " + path);
  return build_dataset(records, any_timestamp);
}

// Implicit-feedback transformation: every retained record gets r = 1.
inline void to_implicit(InteractionDataset& ds) {
  for (auto& list : ds.by_user)
    for (Interaction& r : list) r.rating = 1.0;
}

struct SplitFractions {
  double test = 0.2;
  double valid = 0.1;
};

struct SplitCounts {
  std::size_t train = 0;
  std::size_t valid = 0;
  std::size_t test = 0;
};

// Labels each user's records: floor(test_fraction * n) most-recent records
// become test (seeded random subset when the file has no timestamps), then
// round(valid_fraction * remaining) become valid. Every user keeps at least
// one train record; a single-interaction user contributes train only.
inline SplitCounts split_dataset(InteractionDataset& ds, SplitFractions f,
                                 std::uint64_t seed) {
  SplitCounts counts;
  for (std::size_t u = 0; u < ds.num_users; ++u) {
    auto& list = ds.by_user[u];
    const std::size_t n = list.size();
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    if (ds.has_timestamps) {
      std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (list[a].timestamp != list[b].timestamp)
          return list[a].timestamp < list[b].timestamp;
        return list[a].item < list[b].item;
      });
    } else {
      Rng rng(derive_seed(seed, 0x5eed, u));
      rng.shuffle(order);
    }
    const std::size_t n_test =
        static_cast<std::size_t>(std::floor(f.test * static_cast<double>(n)));
    for (std::size_t i = 0; i < n; ++i)
      list[order[i]].split = (i >= n - n_test) ? Split::test : Split::train;

    std::vector<std::size_t> rest(order.begin(), order.end() - n_test);
    const std::size_t r = rest.size();
    std::size_t n_valid = static_cast<std::size_t>(
        std::llround(f.valid * static_cast<double>(r)));
    if (n_valid >= r && r > 0) n_valid = r - 1;
    Rng vrng(derive_seed(seed, 0xa11d, u));
    vrng.shuffle(rest);
    for (std::size_t i = 0; i < n_valid; ++i) list[rest[i]].split = Split::valid;

    counts.test += n_test;
    counts.valid += n_valid;
    counts.train += n - n_test - n_valid;
  }
  return counts;
}

inline nlohmann::json split_manifest_json(const InteractionDataset& ds,
                                          SplitFractions f, std::uint64_t seed,
                                          const SplitCounts& counts) {
  return nlohmann::json{{"seed", seed},
                        {"test_fraction", f.test},
                        {"valid_fraction", f.valid},
                        {"num_users", ds.num_users},
                        {"num_items", ds.num_items},
                        {"duplicates_collapsed", ds.duplicates_collapsed},
                        {"counts",
                         {{"train", counts.train},
                          {"valid", counts.valid},
                          {"test", counts.test}}}};
}

// Keeps the `keep` most active users (interaction count desc, dense index asc
// on ties) and re-densifies both user and item indices.
inline InteractionDataset subsample_top_users(const InteractionDataset& ds,
                                              std::size_t keep) {
  keep = std::min(keep, ds.num_users);
  std::vector<std::uint32_t> users(ds.num_users);
  for (std::uint32_t u = 0; u < ds.num_users; ++u) users[u] = u;
  std::sort(users.begin(), users.end(), [&](std::uint32_t a, std::uint32_t b) {
    if (ds.by_user[a].size() != ds.by_user[b].size())
      return ds.by_user[a].size() > ds.by_user[b].size();
    return a < b;
  });
  users.resize(keep);
  std::sort(users.begin(), users.end());  // stable identity order

  InteractionDataset out;
  out.has_timestamps = ds.has_timestamps;
  std::vector<std::int64_t> item_remap(ds.num_items, -1);
  for (std::uint32_t old_u : users) {
    out.user_ids.push_back(ds.user_ids[old_u]);
    out.by_user.emplace_back();
    for (const Interaction& r : ds.by_user[old_u]) {
      if (item_remap[r.item] < 0) {
        item_remap[r.item] = static_cast<std::int64_t>(out.item_ids.size());
        out.item_ids.push_back(ds.item_ids[r.item]);
      }
      Interaction copy = r;
      copy.item = static_cast<std::uint32_t>(item_remap[r.item]);
      out.by_user.back().push_back(copy);
    }
  }
  out.num_users = out.user_ids.size();
  out.num_items = out.item_ids.size();
  return out;
}

struct PopularityTable {
  std::vector<std::uint64_t> counts;     // train-split interactions per item
  Vec probabilities;                     // counts / total (uniform if total=0)
  std::vector<std::uint32_t> hot_items;  // V_hot, |hot_count| most popular
  std::vector<std::uint32_t> normal_items;
  std::vector<char> is_hot;
};

// Train-split popularity. Hot set: top `hot_count` items by count, ties broken
// by lower item index; zero-count items are only admitted when every item has
// count zero.
inline PopularityTable compute_popularity(const InteractionDataset& ds,
                                          std::size_t hot_count) {
  PopularityTable table;
  table.counts.assign(ds.num_items, 0);
  for (const auto& list : ds.by_user)
    for (const Interaction& r : list)
      if (r.split == Split::train) table.counts[r.item] += 1;

  std::uint64_t total = 0;
  for (std::uint64_t c : table.counts) total += c;
  table.probabilities.assign(ds.num_items, 0.0);
  for (std::size_t i = 0; i < ds.num_items; ++i)
    table.probabilities[i] =
        total ? static_cast<double>(table.counts[i]) / static_cast<double>(total)
              : 1.0 / static_cast<double>(ds.num_items ? ds.num_items : 1);

  std::vector<std::uint32_t> order(ds.num_items);
  for (std::uint32_t i = 0; i < ds.num_items; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
    if (table.counts[a] != table.counts[b]) return table.counts[a] > table.counts[b];
    return a < b;
  });
  std::size_t take = std::min(hot_count, ds.num_items);
  if (total > 0) {
    std::size_t nonzero = 0;
    while (nonzero < ds.num_items && table.counts[order[nonzero]] > 0) ++nonzero;
    take = std::min(take, nonzero);
  }
  table.is_hot.assign(ds.num_items, 0);
  for (std::size_t i = 0; i < take; ++i) {
    table.hot_items.push_back(order[i]);
    table.is_hot[order[i]] = 1;
  }
  for (std::uint32_t i = 0; i < ds.num_items; ++i)
    if (!table.is_hot[i]) table.normal_items.push_back(i);
  return table;
}

// One client's training material: train positives plus freshly sampled
// negatives (uniform over items the user never interacted with in any split).
struct ClientDataset {
  std::uint32_t owner = 0;
  std::vector<std::uint32_t> positives;
  std::vector<std::uint32_t> negatives;
};

// Uniform sample without replacement from non-interacted items. Returns
// min(ratio * num_positives, available) items; empty when the user has
// interacted with the whole catalog.
inline std::vector<std::uint32_t> sample_negatives(
    const std::vector<char>& interacted, std::size_t num_items,
    std::size_t num_positives, std::size_t ratio, Rng& rng) {
  std::vector<std::uint32_t> pool;
  pool.reserve(num_items);
  for (std::uint32_t i = 0; i < num_items; ++i)
    if (!interacted[i]) pool.push_back(i);
  const std::size_t want = std::min(pool.size(), ratio * num_positives);
  // Partial Fisher-Yates: draw `want` items without replacement.
  for (std::size_t i = 0; i < want; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(pool.size() - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(want);
  return pool;
}

inline std::vector<char> interaction_mask(const InteractionDataset& ds,
                                          std::uint32_t user) {
  std::vector<char> mask(ds.num_items, 0);
  for (const Interaction& r : ds.by_user[user]) mask[r.item] = 1;
  return mask;
}

inline ClientDataset make_client_dataset(const InteractionDataset& ds,
                                         std::uint32_t user, std::size_t ratio,
                                         Rng& rng) {
  ClientDataset client;
  client.owner = user;
  for (const Interaction& r : ds.by_user[user])
    if (r.split == Split::train) client.positives.push_back(r.item);
  const std::vector<char> mask = interaction_mask(ds, user);
  client.negatives =
      sample_negatives(mask, ds.num_items, client.positives.size(), ratio, rng);
  return client;
}

// ---------------------------------------------------------------------------
// Synthetic dataset generation. The lab ships a seeded generator producing a
// MovieLens-shaped implicit-feedback TSV: power-law item popularity plus
// clustered user tastes, so collaborative structure is learnable at desk
// scale.
// ---------------------------------------------------------------------------

struct SynthConfig {
  std::size_t users = 200;
  std::size_t items = 400;
  std::size_t min_interactions = 20;
  std::size_t max_interactions = 60;
  std::size_t clusters = 8;
  double zipf_exponent = 1.0;
  double head_probability = 0.35;  // chance a draw comes from the global head
  std::size_t head_size = 40;
};

inline std::vector<RawInteraction> generate_synthetic_interactions(
    const SynthConfig& cfg, std::uint64_t seed) {
  Rng rng(derive_seed(seed, 0x5f9d));
  // Zipf-like base popularity over a shuffled item order, so hot items are
  // spread across index space.
  std::vector<std::uint32_t> rank_of(cfg.items);
  for (std::uint32_t i = 0; i < cfg.items; ++i) rank_of[i] = i;
  rng.shuffle(rank_of);
  Vec base(cfg.items);
  for (std::size_t i = 0; i < cfg.items; ++i)
    base[i] = 1.0 / std::pow(static_cast<double>(rank_of[i] + 1), cfg.zipf_exponent);

  std::vector<std::uint32_t> head;  // globally popular items
  {
    std::vector<std::uint32_t> order(cfg.items);
    for (std::uint32_t i = 0; i < cfg.items; ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::uint32_t a, std::uint32_t b) { return base[a] > base[b]; });
    head.assign(order.begin(),
                order.begin() + std::min(cfg.head_size, cfg.items));
  }

  // Cluster item affinity: each item belongs to one taste cluster.
  std::vector<std::uint32_t> item_cluster(cfg.items);
  for (std::uint32_t i = 0; i < cfg.items; ++i)
    item_cluster[i] = static_cast<std::uint32_t>(rng.below(cfg.clusters));

  std::vector<RawInteraction> records;
  std::int64_t clock = 0;
  for (std::uint32_t u = 0; u < cfg.users; ++u) {
    const std::uint32_t cluster = static_cast<std::uint32_t>(rng.below(cfg.clusters));
    const std::size_t span = cfg.max_interactions - cfg.min_interactions + 1;
    const std::size_t n = cfg.min_interactions + rng.below(span);

    Vec weights(cfg.items);
    for (std::size_t i = 0; i < cfg.items; ++i)
      weights[i] = base[i] * (item_cluster[i] == cluster ? 4.0 : 0.25);
    std::vector<char> taken(cfg.items, 0);
    std::size_t made = 0;
    while (made < n && made < cfg.items) {
      std::uint32_t pick;
      if (rng.uniform() < cfg.head_probability) {
        pick = head[rng.below(head.size())];
      } else {
        double total = 0.0;
        for (std::size_t i = 0; i < cfg.items; ++i)
          if (!taken[i]) total += weights[i];
        double target = rng.uniform() * total;
        pick = 0;
        for (std::uint32_t i = 0; i < cfg.items; ++i) {
          if (taken[i]) continue;
          target -= weights[i];
          if (target <= 0.0) {
            pick = i;
            break;
          }
        }
      }
      if (taken[pick]) continue;
      taken[pick] = 1;
      records.push_back({static_cast<std::int64_t>(u),
                         static_cast<std::int64_t>(pick), 1.0, clock++});
      ++made;
    }
  }
  return records;
}

inline void write_tsv(const std::string& path,
                      const std::vector<RawInteraction>& records) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_tsv: cannot open " + path);
  out << "# user\titem\trating\ttimestamp\n";
  for (const RawInteraction& r : records)
    out << r.user << '\t' << r.item << '\t' << r.rating << '\t' << r.timestamp
        << '\n';
}

}  // namespace fedrec
