#include "ocsplab/collision.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <exception>
#include <thread>

#include "ocsplab/error.hpp"
#include "ocsplab/textio.hpp"

namespace ocsplab {

namespace {

std::uint64_t mix(std::uint64_t x) {
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ull;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

std::uint64_t saturating_mul(std::uint64_t a, std::uint64_t b) {
  std::uint64_t r = 0;
  return __builtin_mul_overflow(a, b, &r) ? ~std::uint64_t{0} : r;
}

/// Where a global ordinal lands: which side and which step of that side's walk.
class Interleave {
 public:
  Interleave(const SourceGenerator& g1, const SourceGenerator& g2, const SearchOptions& o)
      : r_{o.h1_per_block, o.h2_per_block}, limit_{g1.size, g2.size} {
    if (r_[0] == 0 || r_[1] == 0) throw Error(Errc::invalid_argument, "interleave ratio entries must be positive");
  }

  std::uint64_t block() const { return std::uint64_t{r_[0]} + r_[1]; }

  std::pair<int, std::uint64_t> locate(std::uint64_t ordinal) const {
    const std::uint64_t b = ordinal / block(), p = ordinal % block();
    if (p < r_[0]) return {0, b * r_[0] + p};
    return {1, b * r_[1] + (p - r_[0])};
  }

  bool live(int side, std::uint64_t step) const { return limit_[side] == 0 || step < limit_[side]; }

  /// Evaluations per side among ordinals [0, n).
  std::pair<std::uint64_t, std::uint64_t> evaluations_before(std::uint64_t n) const {
    const std::uint64_t b = n / block(), p = n % block();
    std::uint64_t c0 = b * r_[0] + std::min<std::uint64_t>(p, r_[0]);
    std::uint64_t c1 = b * r_[1] + (p > r_[0] ? p - r_[0] : 0);
    if (limit_[0] != 0) c0 = std::min(c0, limit_[0]);
    if (limit_[1] != 0) c1 = std::min(c1, limit_[1]);
    return {c0, c1};
  }

  std::uint64_t total_before(std::uint64_t n) const {
    const auto [a, b] = evaluations_before(n);
    return a + b;
  }

  /// Smallest n whose prefix holds min(budget, all available) evaluations.
  std::uint64_t ordinal_end(std::uint64_t budget) const {
    std::uint64_t target = budget;
    if (limit_[0] != 0 && limit_[1] != 0) target = std::min(target, limit_[0] + limit_[1]);
    std::uint64_t lo = 0, hi = saturating_mul(target, block());
    while (lo < hi) {
      const std::uint64_t mid = lo + (hi - lo) / 2;
      if (total_before(mid) >= target) hi = mid;
      else lo = mid + 1;
    }
    return lo;
  }

 private:
  unsigned r_[2];
  std::uint64_t limit_[2];
};

std::uint64_t walk_index(const SourceGenerator& g, std::uint64_t offset, std::uint64_t step) {
  return g.size == 0 ? offset + step : (offset % g.size + step) % g.size;
}

std::uint64_t parse_u64(std::string_view s, const char* what) {
  std::uint64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || p != s.data() + s.size()) {
    throw Error(Errc::malformed_record, std::string("bad ") + what + " '" + std::string(s) + "'");
  }
  return v;
}

}  // namespace

double expected_trials(int hash_bits) {
  if (hash_bits < 1) throw Error(Errc::invalid_argument, "hash width must be at least one bit");
  return 1.25 * std::exp2(hash_bits / 2.0);
}

SourceGenerator recipe_generator(const RecipeStream& stream) {
  return {"recipes", stream.count(), [&stream](std::uint64_t i) { return stream.tbs_at(i); }};
}

SourceGenerator fake_response_generator(FakeResponseSpec spec) {
  return {"fake-response", 0, [spec = std::move(spec)](std::uint64_t i) { return fake_response_source(spec, i); }};
}

SourceGenerator fake_certificate_generator(FakeCertificateSpec spec) {
  return {"fake-certificate", 0,
          [spec = std::move(spec)](std::uint64_t i) { return fake_certificate_source(spec, i); }};
}

SourceGenerator random_generator(std::string label) {
  const std::string id = "random:" + label;
  return {id, 0, [label = std::move(label)](std::uint64_t i) {
            Bytes in = to_bytes(label);
            append(in, be_bytes(i));
            return sha256(in);
          }};
}

// ---- store --------------------------------------------------------------

HashStore::HashStore(std::size_t expected_entries, unsigned shard_bits)
    : shard_bits_(shard_bits), shards_(std::size_t{1} << shard_bits) {
  std::size_t per_shard = 16;
  while (per_shard < 2 * expected_entries / shards_.size()) per_shard *= 2;
  for (auto& s : shards_) s.slots.resize(per_shard);
}

std::uint64_t store_key(ByteView digest) {
  std::uint64_t k = 0;
  for (std::size_t i = 0; i < std::min<std::size_t>(8, digest.size()); ++i) k = (k << 8) | digest[i];
  return k;
}

HashStore::Shard& HashStore::shard_for(std::uint64_t mixed) { return shards_[mixed >> (64 - shard_bits_)]; }
const HashStore::Shard& HashStore::shard_for(std::uint64_t mixed) const {
  return shards_[mixed >> (64 - shard_bits_)];
}

void HashStore::place(std::vector<Entry>& slots, const Entry& e, std::uint64_t mixed) {
  const std::size_t mask = slots.size() - 1;
  for (std::size_t i = mixed & mask;; i = (i + 1) & mask) {
    if (slots[i].ordinal[0] == none && slots[i].ordinal[1] == none) {
      slots[i] = e;
      return;
    }
  }
}

HashStore::Outcome HashStore::insert(std::uint64_t key, int side, std::uint64_t ordinal) {
  const std::uint64_t mixed = mix(key);
  Shard& s = shard_for(mixed);
  std::lock_guard lock(s.mu);
  const std::size_t mask = s.slots.size() - 1;
  for (std::size_t i = mixed & mask;; i = (i + 1) & mask) {
    Entry& e = s.slots[i];
    if (e.ordinal[0] == none && e.ordinal[1] == none) break;
    if (e.key != key) continue;
    if (e.ordinal[side] != none) {
      e.ordinal[side] = std::min(e.ordinal[side], ordinal);
      return Outcome::same_side;
    }
    e.ordinal[side] = ordinal;
    return Outcome::cross;
  }
  if (2 * (s.used + 1) > s.slots.size()) {
    std::vector<Entry> bigger(s.slots.size() * 2);
    for (const Entry& e : s.slots) {
      if (e.ordinal[0] != none || e.ordinal[1] != none) place(bigger, e, mix(e.key));
    }
    s.slots = std::move(bigger);
  }
  Entry fresh;
  fresh.key = key;
  fresh.ordinal[side] = ordinal;
  place(s.slots, fresh, mixed);
  ++s.used;
  return Outcome::fresh;
}

std::optional<HashStore::Entry> HashStore::lookup(std::uint64_t key) const {
  const std::uint64_t mixed = mix(key);
  const Shard& s = shard_for(mixed);
  std::lock_guard lock(s.mu);
  const std::size_t mask = s.slots.size() - 1;
  for (std::size_t i = mixed & mask;; i = (i + 1) & mask) {
    const Entry& e = s.slots[i];
    if (e.ordinal[0] == none && e.ordinal[1] == none) return std::nullopt;
    if (e.key == key) return e;
  }
}

std::size_t HashStore::size() const {
  std::size_t n = 0;
  for (const auto& s : shards_) {
    std::lock_guard lock(s.mu);
    n += s.used;
  }
  return n;
}

std::size_t HashStore::memory_bytes() const {
  std::size_t n = sizeof(*this) + shards_.size() * sizeof(Shard);
  for (const auto& s : shards_) {
    std::lock_guard lock(s.mu);
    n += s.slots.capacity() * sizeof(Entry);
  }
  return n;
}

// ---- search -------------------------------------------------------------

SearchResult birthday_search(const SourceGenerator& gen1, const SourceGenerator& gen2, const HashSpec& spec,
                             const SearchOptions& options) {
  if (options.budget < 2) throw Error(Errc::invalid_argument, "budget must allow at least two evaluations");
  if (options.round_size == 0) throw Error(Errc::invalid_argument, "round size must be positive");
  const Interleave plan(gen1, gen2, options);
  const SourceGenerator* gens[2] = {&gen1, &gen2};
  RandomSource rng(options.seed);
  const std::uint64_t offset[2] = {options.h1_offset.value_or(rng.next()), options.h2_offset.value_or(rng.next())};
  const unsigned workers = std::max(1u, options.workers);
  const std::uint64_t end = plan.ordinal_end(options.budget);

  HashStore store;
  SearchResult result;
  std::atomic<std::uint64_t> same_side{0};

  auto regenerate = [&](int side, std::uint64_t ordinal) {
    const std::uint64_t step = plan.locate(ordinal).second;
    const std::uint64_t index = walk_index(*gens[side], offset[side], step);
    return std::pair{index, gens[side]->produce(index)};
  };

  for (std::uint64_t base = 0; base < end; base += options.round_size) {
    const std::uint64_t stop = std::min(end, base + options.round_size);
    std::vector<std::vector<std::uint64_t>> hits(workers);
    std::vector<std::exception_ptr> failures(workers);
    auto work = [&](unsigned w, std::uint64_t from, std::uint64_t to) {
      try {
        std::uint64_t local_same = 0;
        for (std::uint64_t o = from; o < to; ++o) {
          const auto [side, step] = plan.locate(o);
          if (!plan.live(side, step)) continue;
          const Bytes pre = gens[side]->produce(walk_index(*gens[side], offset[side], step));
          const std::uint64_t key = store_key(digest(spec, pre));
          switch (store.insert(key, side, o)) {
            case HashStore::Outcome::fresh: break;
            case HashStore::Outcome::same_side: ++local_same; break;
            case HashStore::Outcome::cross: hits[w].push_back(key); break;
          }
        }
        same_side += local_same;
      } catch (...) {
        failures[w] = std::current_exception();
      }
    };
    const std::uint64_t span = stop - base;
    if (workers == 1 || span < 2 * workers) {
      work(0, base, stop);
    } else {
      std::vector<std::jthread> pool;
      for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back(work, w, base + span * w / workers, base + span * (w + 1) / workers);
      }
    }
    for (auto& f : failures)
      if (f) std::rethrow_exception(f);

    struct Hit {
      std::uint64_t completion, first, key;
      HashStore::Entry entry;
    };
    std::vector<Hit> ordered;
    for (const auto& list : hits) {
      for (std::uint64_t key : list) {
        const auto e = *store.lookup(key);
        ordered.push_back({std::max(e.ordinal[0], e.ordinal[1]), e.ordinal[0], key, e});
      }
    }
    std::sort(ordered.begin(), ordered.end(),
              [](const Hit& a, const Hit& b) { return std::tie(a.completion, a.first) < std::tie(b.completion, b.first); });
    for (const Hit& h : ordered) {
      const auto [i1, p1] = regenerate(0, h.entry.ordinal[0]);
      const auto [i2, p2] = regenerate(1, h.entry.ordinal[1]);
      const Bytes d1 = digest(spec, p1);
      if (d1 != digest(spec, p2)) continue;
      if (p1 == p2) {
        ++result.stats.equal_preimage_rejections;
        continue;
      }
      CollisionCandidate c;
      c.h1_generator = gen1.id;
      c.h1_index = i1;
      c.h2_generator = gen2.id;
      c.h2_index = i2;
      c.hash_spec = spec;
      c.hash = d1;
      const auto [e1, e2] = plan.evaluations_before(h.completion + 1);
      result.stats.h1_evaluations = e1;
      result.stats.h2_evaluations = e2;
      result.stats.evaluations = e1 + e2;
      result.candidate = std::move(c);
      break;
    }
    if (result.candidate) break;
  }

  if (!result.candidate) {
    const auto [e1, e2] = plan.evaluations_before(end);
    result.stats.h1_evaluations = e1;
    result.stats.h2_evaluations = e2;
    result.stats.evaluations = e1 + e2;
  }
  result.stats.same_side_collisions = same_side;
  result.stats.store_entries = store.size();
  result.stats.store_bytes = store.memory_bytes();
  if (result.candidate) result.candidate->stats = result.stats;
  return result;
}

CollisionCandidate require_collision(const SourceGenerator& gen1, const SourceGenerator& gen2, const HashSpec& spec,
                                     const SearchOptions& options) {
  SearchResult r = birthday_search(gen1, gen2, spec, options);
  if (!r.candidate) {
    throw Error(Errc::budget_exhausted, "no cross collision after " + std::to_string(r.stats.evaluations) +
                                            " evaluations (" + std::to_string(r.stats.h1_evaluations) + " + " +
                                            std::to_string(r.stats.h2_evaluations) + ")");
  }
  return std::move(*r.candidate);
}

void attach_recipe(CollisionCandidate& candidate, const RecipeStream& stream) {
  candidate.recipe = stream.at(candidate.h1_index);
}

bool verify_candidate(const CollisionCandidate& c, const SourceGenerator& gen1, const SourceGenerator& gen2) {
  if (c.h1_generator != gen1.id || c.h2_generator != gen2.id) return false;
  if ((gen1.size != 0 && c.h1_index >= gen1.size) || (gen2.size != 0 && c.h2_index >= gen2.size)) return false;
  const Bytes p1 = gen1.produce(c.h1_index);
  const Bytes p2 = gen2.produce(c.h2_index);
  if (p1 == p2) return false;
  const Bytes d1 = digest(c.hash_spec, p1);
  if (d1 != c.hash || digest(c.hash_spec, p2) != c.hash) return false;
  if (c.recipe && c.recipe->predicted_tbs != p1) return false;
  return true;
}

// ---- records ------------------------------------------------------------

std::string serialize_candidate(const CollisionCandidate& c) {
  KvRecord r;
  r.add("format", "ocsplab-candidate-1");
  r.add("hash_spec", c.hash_spec.name());
  r.add("hash", to_hex(c.hash));
  r.add("h1_generator", c.h1_generator);
  r.add("h1_index", std::to_string(c.h1_index));
  r.add("h2_generator", c.h2_generator);
  r.add("h2_index", std::to_string(c.h2_index));
  r.add("evaluations", std::to_string(c.stats.evaluations));
  r.add("h1_evaluations", std::to_string(c.stats.h1_evaluations));
  r.add("h2_evaluations", std::to_string(c.stats.h2_evaluations));
  r.add("same_side_collisions", std::to_string(c.stats.same_side_collisions));
  r.add("equal_preimage_rejections", std::to_string(c.stats.equal_preimage_rejections));
  r.add("store_entries", std::to_string(c.stats.store_entries));
  r.add("store_bytes", std::to_string(c.stats.store_bytes));
  if (c.recipe) {
    const RequestRecipe& rc = *c.recipe;
    r.add("recipe_index", std::to_string(rc.index));
    r.add("recipe_serial", rc.serial.to_string());
    r.add("recipe_status", std::string(cert_status_name(rc.status)));
    r.add("recipe_t", format_instant(rc.t));
    r.add("recipe_fire_at", format_instant(rc.fire_at));
    if (rc.nonce) r.add("recipe_nonce", to_hex(*rc.nonce));
    r.add("recipe_request", to_hex(rc.request));
    r.add("recipe_predicted_tbs", to_hex(rc.predicted_tbs));
    r.add("recipe_predicted_hash", to_hex(rc.predicted_hash));
  }
  return r.render();
}

CollisionCandidate parse_candidate(std::string_view text) {
  const KvRecord r = KvRecord::parse(text);
  if (r.require("format") != "ocsplab-candidate-1") throw Error(Errc::malformed_record, "not a candidate record");
  CollisionCandidate c;
  auto num = [&](const char* key) { return parse_u64(r.require(key), key); };
  c.hash_spec = HashSpec::parse(r.require("hash_spec"));
  c.hash = from_hex(r.require("hash"));
  c.h1_generator = r.require("h1_generator");
  c.h1_index = num("h1_index");
  c.h2_generator = r.require("h2_generator");
  c.h2_index = num("h2_index");
  c.stats.evaluations = num("evaluations");
  c.stats.h1_evaluations = num("h1_evaluations");
  c.stats.h2_evaluations = num("h2_evaluations");
  c.stats.same_side_collisions = num("same_side_collisions");
  c.stats.equal_preimage_rejections = num("equal_preimage_rejections");
  c.stats.store_entries = num("store_entries");
  c.stats.store_bytes = num("store_bytes");
  if (r.get("recipe_index")) {
    RequestRecipe rc;
    rc.index = num("recipe_index");
    rc.serial = SerialNumber::parse(r.require("recipe_serial"));
    rc.status = parse_cert_status(r.require("recipe_status"));
    rc.t = parse_instant(r.require("recipe_t"));
    rc.fire_at = parse_instant(r.require("recipe_fire_at"));
    if (auto n = r.get("recipe_nonce")) rc.nonce = from_hex(*n);
    rc.request = from_hex(r.require("recipe_request"));
    rc.predicted_tbs = from_hex(r.require("recipe_predicted_tbs"));
    rc.predicted_hash = from_hex(r.require("recipe_predicted_hash"));
    c.recipe = std::move(rc);
  }
  return c;
}

}  // namespace ocsplab
