#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "ocsplab/bytes.hpp"

namespace ocsplab {

enum class HashAlgorithm { sha1, sha256, toy };

/// SHA-1, SHA-256, or TOY(n): the first n bits of SHA-256, used to make
/// collisions reachable on a desk. A TOY spec may be flagged as standing in
/// for SHA-1, which is how audits classify it.
class HashSpec {
 public:
  HashSpec() = default;

  static HashSpec sha1() { return HashSpec(HashAlgorithm::sha1, 160, false); }
  static HashSpec sha256() { return HashSpec(HashAlgorithm::sha256, 256, false); }
  /// bits must be one of 8, 16, 24, 32, 40, 48.
  static HashSpec toy(int bits, bool sha1_class = false);
  /// "sha1", "sha256", "toyN" or "toyN-sha1".
  static HashSpec parse(std::string_view name);

  HashAlgorithm algorithm() const { return algorithm_; }
  int bits() const { return bits_; }
  std::size_t bytes() const { return static_cast<std::size_t>((bits_ + 7) / 8); }
  /// True for SHA-1 and for TOY specs flagged as SHA-1 stand-ins.
  bool sha1_class() const { return algorithm_ == HashAlgorithm::sha1 || sha1_class_; }
  std::string name() const;

  /// OID used in CertID.hashAlgorithm.
  std::string digest_oid() const;
  /// OID of the signature algorithm "mock signature over this hash".
  std::string signature_oid() const;
  static std::optional<HashSpec> from_digest_oid(std::string_view oid);
  static std::optional<HashSpec> from_signature_oid(std::string_view oid);

  friend bool operator==(const HashSpec&, const HashSpec&) = default;

 private:
  HashSpec(HashAlgorithm a, int bits, bool sha1_class) : algorithm_(a), bits_(bits), sha1_class_(sha1_class) {}

  HashAlgorithm algorithm_ = HashAlgorithm::sha256;
  int bits_ = 256;
  bool sha1_class_ = false;
};

Bytes digest(const HashSpec& spec, ByteView data);

Bytes sha256(ByteView data);
Bytes sha1(ByteView data);

}  // namespace ocsplab
