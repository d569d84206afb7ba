#pragma once

#include <array>
#include <bitset>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <string_view>
#include <vector>

namespace logiprep {

// Coarse universal POS tags. CONJ is the pre-v2 spelling of CCONJ; it is
// accepted on input and in policy sets but the tagger never emits it.
enum class PosTag : std::uint8_t {
  kAdj,
  kAdv,
  kIntj,
  kNoun,
  kPropn,
  kVerb,
  kAdp,
  kAux,
  kCconj,
  kConj,
  kSconj,
  kDet,
  kNum,
  kPart,
  kPron,
  kPunct,
  kSym,
  kX,
};

inline constexpr std::size_t kNumPosTags = 18;

std::string_view pos_tag_name(PosTag tag);
std::optional<PosTag> parse_pos_tag(std::string_view name);

constexpr PosTag normalize_pos_tag(PosTag tag) {
  return tag == PosTag::kConj ? PosTag::kCconj : tag;
}

// All tags in enum order.
const std::array<PosTag, kNumPosTags>& all_pos_tags();

class PosTagSet {
 public:
  PosTagSet() = default;
  PosTagSet(std::initializer_list<PosTag> tags) {
    for (auto t : tags) insert(t);
  }

  static PosTagSet full();

  void insert(PosTag t) { bits_.set(static_cast<std::size_t>(t)); }

  // CONJ and CCONJ are interchangeable for membership.
  bool contains(PosTag t) const {
    if (t == PosTag::kConj || t == PosTag::kCconj) {
      return bits_.test(static_cast<std::size_t>(PosTag::kConj)) ||
             bits_.test(static_cast<std::size_t>(PosTag::kCconj));
    }
    return bits_.test(static_cast<std::size_t>(t));
  }

  bool empty() const { return bits_.none(); }
  std::size_t size() const { return bits_.count(); }
  std::vector<PosTag> tags() const;

  bool is_superset_of(const PosTagSet& other) const {
    return (other.bits_ & ~bits_).none();
  }

  friend bool operator==(const PosTagSet&, const PosTagSet&) = default;

 private:
  std::bitset<kNumPosTags> bits_;
};

}  // namespace logiprep
