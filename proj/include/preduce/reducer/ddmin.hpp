#pragma once

#include <algorithm>
#include <cstddef>
#include <optional>
#include <vector>

namespace preduce::reducer {

namespace detail {

template <class T>
std::vector<std::vector<T>> split(const std::vector<T>& items, std::size_t n) {
  std::vector<std::vector<T>> chunks;
  chunks.reserve(n);
  std::size_t start = 0;
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t len = (items.size() - start) / (n - i);
    chunks.emplace_back(items.begin() + static_cast<std::ptrdiff_t>(start),
                        items.begin() + static_cast<std::ptrdiff_t>(start + len));
    start += len;
  }
  return chunks;
}

}  // namespace detail

/**
 * Delta debugging minimization driven by a "first passing candidate" query.
 *
 * `first_passing(candidates)` receives subsets in the order ddmin would test
 * them and returns the index of the first one that passes (evaluating
 * lazily or in parallel as it sees fit), or nullopt.
 *
 * Precondition: the full `items` list passes. The result passes and is
 * 1-minimal: removing any single element fails. An empty result is returned
 * when the empty list passes. Exceptions from the query propagate.
 */
template <class T, class FirstPassing>
std::vector<T> ddmin_by_rounds(std::vector<T> items, FirstPassing&& first_passing) {
  if (items.empty()) return items;
  if (first_passing(std::vector<std::vector<T>>{{}})) return {};

  std::size_t n = 2;
  while (items.size() >= 2) {
    n = std::min(n, items.size());
    auto chunks = detail::split(items, n);
    if (auto hit = first_passing(chunks)) {
      items = std::move(chunks[*hit]);
      n = 2;
      continue;
    }
    if (n > 2) {
      std::vector<std::vector<T>> complements;
      complements.reserve(n);
      for (std::size_t i = 0; i < n; ++i) {
        std::vector<T> rest;
        rest.reserve(items.size() - chunks[i].size());
        for (std::size_t j = 0; j < n; ++j) {
          if (j != i) rest.insert(rest.end(), chunks[j].begin(), chunks[j].end());
        }
        complements.push_back(std::move(rest));
      }
      if (auto hit = first_passing(complements)) {
        items = std::move(complements[*hit]);
        n = std::max<std::size_t>(n - 1, 2);
        continue;
      }
    }
    if (n >= items.size()) break;
    n = std::min(n * 2, items.size());
  }
  return items;
}

/// ddmin with a plain predicate `test(const std::vector<T>&) -> bool`,
/// evaluated lazily in ddmin order.
template <class T, class Test>
std::vector<T> ddmin(std::vector<T> items, Test&& test) {
  return ddmin_by_rounds(std::move(items), [&](const std::vector<std::vector<T>>& candidates) -> std::optional<std::size_t> {
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      if (test(candidates[i])) return i;
    }
    return std::nullopt;
  });
}

}  // namespace preduce::reducer
