#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace mementomap {

/// Suffix characters: none = Exact, '+' = AtLeast, '-' = AtMost, '~' = Approx.
enum class Modifier : std::uint8_t { Exact, AtLeast, AtMost, Approx };

struct Count {
  std::uint64_t value = 0;
  Modifier modifier = Modifier::Exact;

  friend bool operator==(const Count&, const Count&) = default;
};

/// `[URI-M count][/URI-R count]`; at least one side is present.
struct FrequencyValue {
  std::optional<Count> urim;
  std::optional<Count> urir;

  static FrequencyValue exact(std::uint64_t urim_count) {
    return FrequencyValue{Count{urim_count, Modifier::Exact}, std::nullopt};
  }

  friend bool operator==(const FrequencyValue&, const FrequencyValue&) = default;
};

/// Grammar: `INT[+-~]?(/INT[+-~]?)?` or `/INT[+-~]?`. Throws MalformedFrequency.
FrequencyValue parse_frequency(std::string_view text);

std::string serialize_frequency(const FrequencyValue& f);
void append_frequency(std::string& out, const FrequencyValue& f);

/// Sum used when a sub-tree is rolled up: counts add, and a side stays Exact
/// only if every contributing side was present and Exact (otherwise Approx).
FrequencyValue rollup_sum(const FrequencyValue& a, const FrequencyValue& b);

/// Combination of two records carrying the same key (partitioned outputs).
/// Exact+Exact stays Exact, any Approx gives Approx, a bound survives an exact
/// addend, opposite bounds give Approx. A side missing from one record leaves
/// the other side as a lower bound.
FrequencyValue merge_duplicate(const FrequencyValue& a, const FrequencyValue& b);

/// Zero count asserting explicit absence ("0", "0-", "0~").
bool is_blacklist(const FrequencyValue& f) noexcept;

/// Total URI-M count (URI-R count if URI-M is absent).
std::uint64_t primary_count(const FrequencyValue& f) noexcept;

}  // namespace mementomap
