#include "latent_split/decomposition.hpp"

#include <algorithm>
#include <numeric>
#include <set>

#include "latent_split/error.hpp"
#include "latent_split/metrics.hpp"
#include "latent_split/random.hpp"

namespace latent_split {

std::string_view to_string(Strategy strategy) {
  switch (strategy) {
    case Strategy::TopK: return "top";
    case Strategy::RandomK: return "random";
    case Strategy::LastK: return "last";
    case Strategy::TopHalfRandomHalf: return "top-half-random";
  }
  return "top";
}

std::optional<Strategy> parse_strategy(std::string_view text) {
  if (text == "top") return Strategy::TopK;
  if (text == "random") return Strategy::RandomK;
  if (text == "last") return Strategy::LastK;
  if (text == "top-half-random") return Strategy::TopHalfRandomHalf;
  return std::nullopt;
}

namespace {

std::vector<std::size_t> range(std::size_t begin, std::size_t end) {
  std::vector<std::size_t> out(end - begin);
  std::iota(out.begin(), out.end(), begin);
  return out;
}

std::vector<std::size_t> style_indices_for(std::size_t r, std::size_t k,
                                           const SelectionStrategy& strategy) {
  switch (strategy.variant) {
    case Strategy::TopK: return range(0, k);
    case Strategy::LastK: return range(r - k, r);
    case Strategy::RandomK: {
      SplitMix64 rng(*strategy.seed);
      return sample_without_replacement(range(0, r), k, rng);
    }
    case Strategy::TopHalfRandomHalf: {
      const std::size_t top = k / 2;
      SplitMix64 rng(*strategy.seed);
      auto out = range(0, top);
      auto drawn = sample_without_replacement(range(top, r), k - top, rng);
      out.insert(out.end(), drawn.begin(), drawn.end());
      return out;
    }
  }
  return {};
}

void check_k(std::size_t k, std::size_t r) {
  if (k < 1 || k >= r) {
    throw Error(ErrorCode::KOutOfRange, "k = " + std::to_string(k) + " must satisfy 1 <= k < " +
                                            std::to_string(r) + " (available singular directions)");
  }
}

}  // namespace

SubspaceSplit split(const SvdFactorization& factors, std::size_t k,
                    const SelectionStrategy& strategy, std::string genre_id) {
  const std::size_t r = factors.rank_capacity();
  check_k(k, r);
  if (strategy.randomized() && !strategy.seed) {
    throw Error(ErrorCode::InvalidArgument,
                "strategy '" + std::string(to_string(strategy.variant)) + "' requires a seed");
  }
  SubspaceSplit out;
  out.k = k;
  out.dim = factors.dim();
  out.rank = r;
  out.style_indices = style_indices_for(r, k, strategy);
  std::sort(out.style_indices.begin(), out.style_indices.end());
  const std::set<std::size_t> style(out.style_indices.begin(), out.style_indices.end());
  for (std::size_t i = 0; i < r; ++i)
    if (!style.contains(i)) out.content_indices.push_back(i);
  out.style_basis = Basis::from_columns(factors.v, out.style_indices);
  out.content_basis = Basis::from_columns(factors.v, out.content_indices);
  out.genre_id = std::move(genre_id);
  out.strategy = strategy;
  return out;
}

Matrix embed_style(const Matrix& x, const SubspaceSplit& split) {
  return project(x, split.style_basis);
}

Matrix embed_content(const Matrix& x, const SubspaceSplit& split) {
  return project(x, split.content_basis);
}

GapFunction silhouette_gap() {
  return [](const Matrix& embedding, std::span<const std::string> labels) {
    return silhouette(embedding, labels).mean_score;
  };
}

KSweepResult select_k(const Matrix& genre_data, std::span<const std::string> game_labels,
                      std::span<const std::size_t> candidates, const GapFunction& gap_fn) {
  return select_k(genre_data, svd(genre_data), game_labels, candidates, gap_fn);
}

KSweepResult select_k(const Matrix& genre_data, const SvdFactorization& factors,
                      std::span<const std::string> game_labels,
                      std::span<const std::size_t> candidates, const GapFunction& gap_fn) {
  if (game_labels.size() != genre_data.rows()) {
    throw Error(ErrorCode::LengthMismatch, "select_k: one game label per row required");
  }
  const std::set<std::string_view> games(game_labels.begin(), game_labels.end());
  if (games.size() < 2) {
    throw Error(ErrorCode::TooFewGames, "select_k needs at least two distinct games, got " +
                                            std::to_string(games.size()));
  }
  if (candidates.empty()) throw Error(ErrorCode::InvalidArgument, "no candidate k values");
  const std::size_t r = factors.rank_capacity();
  for (std::size_t k : candidates) check_k(k, r);

  // Columns of X·V in singular-value order; TopK style/content embeddings are
  // column slices of it.
  const Matrix all_dirs = project(genre_data, Basis(factors.v));

  KSweepResult result;
  result.singular_values = factors.s;
  for (std::size_t k : candidates) {
    const Matrix style = all_dirs.select_cols(range(0, k));
    const Matrix content = all_dirs.select_cols(range(k, r));
    const double s = gap_fn(style, game_labels);
    const double c = gap_fn(content, game_labels);
    result.candidates.push_back(k);
    result.style_score.push_back(s);
    result.content_score.push_back(c);
    result.gap_diff.push_back(s - c);
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < result.candidates.size(); ++i) {
    const double d = result.gap_diff[i];
    const double bd = result.gap_diff[best];
    if (d > bd || (d == bd && result.candidates[i] < result.candidates[best])) best = i;
  }
  result.chosen_k = result.candidates[best];
  return result;
}

}  // namespace latent_split
