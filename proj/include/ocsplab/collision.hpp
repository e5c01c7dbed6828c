#pragma once

#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "ocsplab/forgery.hpp"
#include "ocsplab/hash.hpp"
#include "ocsplab/predictor.hpp"

/// Two-set birthday search between predicted responses (side 1) and forged
/// sources (side 2).
namespace ocsplab {

/// 1.25 * 2^(bits/2).
double expected_trials(int hash_bits);

/// Deterministic indexed source of preimages. size == 0 means the index
/// space is the full 64-bit range.
struct SourceGenerator {
  std::string id;
  std::uint64_t size = 0;
  std::function<Bytes(std::uint64_t)> produce;
};

SourceGenerator recipe_generator(const RecipeStream& stream);
SourceGenerator fake_response_generator(FakeResponseSpec spec);
SourceGenerator fake_certificate_generator(FakeCertificateSpec spec);
/// SHA-256(label || index), for statistics independent of OCSP encoding.
SourceGenerator random_generator(std::string label);

/// Hash → first ordinal seen on each side. Keys are the leading 64 bits of
/// the digest; sharded by key so workers insert concurrently.
class HashStore {
 public:
  static constexpr std::uint64_t none = ~std::uint64_t{0};

  struct Entry {
    std::uint64_t key = 0;
    std::uint64_t ordinal[2] = {none, none};
  };

  enum class Outcome { fresh, same_side, cross };

  explicit HashStore(std::size_t expected_entries = 0, unsigned shard_bits = 6);

  /// Keeps the smallest ordinal per side, so the final state does not depend
  /// on insertion order.
  Outcome insert(std::uint64_t key, int side, std::uint64_t ordinal);
  std::optional<Entry> lookup(std::uint64_t key) const;

  std::size_t size() const;
  std::size_t memory_bytes() const;

 private:
  struct Shard {
    mutable std::mutex mu;
    std::vector<Entry> slots;
    std::size_t used = 0;
  };
  Shard& shard_for(std::uint64_t mixed);
  const Shard& shard_for(std::uint64_t mixed) const;
  static void place(std::vector<Entry>& slots, const Entry& e, std::uint64_t mixed);

  unsigned shard_bits_;
  std::vector<Shard> shards_;
};

/// Leading bytes of a digest as a big-endian integer (at most 8 bytes).
std::uint64_t store_key(ByteView digest);

struct SearchOptions {
  std::uint64_t budget = std::uint64_t{1} << 20;
  std::uint64_t seed = 1;
  unsigned workers = 1;
  /// Evaluations per side within each interleave block.
  unsigned h1_per_block = 1;
  unsigned h2_per_block = 1;
  /// Start of each side's index walk; drawn from the seed when not set.
  std::optional<std::uint64_t> h1_offset;
  std::optional<std::uint64_t> h2_offset;
  /// Evaluations per synchronisation round. Results depend on this, not on
  /// the worker count.
  std::uint64_t round_size = 8192;
};

struct SearchStats {
  /// Evaluations up to and including the one completing the collision, or
  /// all evaluations when the budget ran out.
  std::uint64_t evaluations = 0;
  std::uint64_t h1_evaluations = 0;
  std::uint64_t h2_evaluations = 0;
  std::uint64_t same_side_collisions = 0;
  std::uint64_t equal_preimage_rejections = 0;
  std::size_t store_entries = 0;
  std::size_t store_bytes = 0;

  friend bool operator==(const SearchStats&, const SearchStats&) = default;
};

struct CollisionCandidate {
  std::string h1_generator;
  std::uint64_t h1_index = 0;
  std::string h2_generator;
  std::uint64_t h2_index = 0;
  HashSpec hash_spec;
  Bytes hash;
  /// Filled for recipe-backed side 1 generators.
  std::optional<RequestRecipe> recipe;
  SearchStats stats;

  friend bool operator==(const CollisionCandidate&, const CollisionCandidate&) = default;
};

struct SearchResult {
  std::optional<CollisionCandidate> candidate;
  SearchStats stats;
};

SearchResult birthday_search(const SourceGenerator& gen1, const SourceGenerator& gen2, const HashSpec& spec,
                             const SearchOptions& options = {});

/// As birthday_search but throws BudgetExhausted instead of returning empty.
CollisionCandidate require_collision(const SourceGenerator& gen1, const SourceGenerator& gen2, const HashSpec& spec,
                                     const SearchOptions& options = {});

/// Fills candidate.recipe from the stream the side 1 generator was built on.
void attach_recipe(CollisionCandidate& candidate, const RecipeStream& stream);

/// Regenerates both preimages and checks equal digests over unequal bytes.
bool verify_candidate(const CollisionCandidate& c, const SourceGenerator& gen1, const SourceGenerator& gen2);

std::string serialize_candidate(const CollisionCandidate& c);
CollisionCandidate parse_candidate(std::string_view text);

}  // namespace ocsplab
