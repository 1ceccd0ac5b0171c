#include "commands.hpp"

#include <algorithm>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "latent_split/dataset.hpp"
#include "latent_split/decomposition.hpp"
#include "latent_split/linalg.hpp"
#include "latent_split/metrics.hpp"
#include "latent_split/probes.hpp"
#include "latent_split/random.hpp"
#include "latent_split/synth.hpp"
#include "latent_split/text.hpp"
#include "latent_split/tsne.hpp"
#include "provenance.hpp"

namespace latent_split::cli {

namespace fs = std::filesystem;

int exit_code_for(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument:
    case ErrorCode::InvalidConfig:
      return kExitUsage;
    case ErrorCode::ConvergenceFailure:
    case ErrorCode::NonFiniteGradient:
    case ErrorCode::DegenerateDesign:
      return kExitNumerical;
    default:
      return kExitDataError;
  }
}

namespace {

struct Global {
  std::uint64_t seed = 0;
  std::string out = ".";
  std::string format = "csv";
};

struct DataOptions {
  std::string features;
  std::string metadata;
  std::string targets;
  std::string genre;  // empty: every genre
};

struct SplitOptions {
  std::size_t k = kDefaultStyleDim;
  std::string strategy = "top";
};

struct TsneOptions {
  double perplexity = 30.0;
  std::size_t iterations = 1000;
  std::string init = "pca";
};

const std::vector<std::string> kEmbeddingNames = {"latent", "style", "content"};

void add_data_options(CLI::App* cmd, DataOptions& d, bool with_targets, bool with_genre = true) {
  cmd->add_option("--features", d.features, "GEMB feature matrix")->required();
  cmd->add_option("--metadata", d.metadata, "Metadata CSV")->required();
  if (with_targets) cmd->add_option("--targets", d.targets, "GEMB target matrix");
  if (with_genre) cmd->add_option("--genre", d.genre, "Genre to analyse (default: every genre)");
}

void add_split_options(CLI::App* cmd, SplitOptions& s) {
  cmd->add_option("--k", s.k, "Style dimensionality")->check(CLI::PositiveNumber);
  cmd->add_option("--strategy", s.strategy, "top, random, last or top-half-random")
      ->check(CLI::IsMember({"top", "random", "last", "top-half-random"}));
}

void add_tsne_options(CLI::App* cmd, TsneOptions& t) {
  cmd->add_option("--perplexity", t.perplexity, "t-SNE perplexity")->check(CLI::PositiveNumber);
  cmd->add_option("--tsne-iter", t.iterations, "t-SNE iterations")->check(CLI::PositiveNumber);
  cmd->add_option("--tsne-init", t.init, "pca or random")->check(CLI::IsMember({"pca", "random"}));
}

TsneConfig tsne_config(const TsneOptions& t, std::uint64_t seed) {
  TsneConfig c;
  c.perplexity = t.perplexity;
  c.n_iter = t.iterations;
  c.init = *parse_tsne_init(t.init);
  c.seed = derive_seed(seed, Stream::Tsne);
  return c;
}

EmbeddingDataset load(const DataOptions& d) {
  std::optional<fs::path> targets;
  if (!d.targets.empty()) targets = d.targets;
  return load_dataset(d.features, d.metadata, targets);
}

std::vector<InputDigest> digests(const DataOptions& d) {
  std::vector<InputDigest> out{digest(d.features), digest(d.metadata)};
  if (!d.targets.empty()) out.push_back(digest(d.targets));
  return out;
}

std::vector<std::string> genres_to_run(const EmbeddingDataset& ds, const DataOptions& d) {
  if (d.genre.empty()) return list_genres(ds);
  return {d.genre};
}

/// Genre ids are free text; file names keep only [A-Za-z0-9._-].
std::string file_token(std::string_view id) {
  std::string s(id);
  for (char& c : s) {
    const bool keep = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                      c == '.' || c == '_' || c == '-';
    if (!keep) c = '_';
  }
  return s;
}

fs::path output_dir(const Global& g) {
  const fs::path dir(g.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoFailure, "cannot create output directory " + dir.string());
  return dir;
}

SelectionStrategy selection(const SplitOptions& s, std::uint64_t seed) {
  SelectionStrategy out{*parse_strategy(s.strategy), std::nullopt};
  if (out.randomized()) out.seed = derive_seed(seed, Stream::Selection);
  return out;
}

struct GenreSplit {
  EmbeddingDataset data;
  SvdFactorization factors;
  SubspaceSplit split;
};

GenreSplit decompose_genre(const EmbeddingDataset& ds, const std::string& genre,
                           const SplitOptions& s, std::uint64_t seed) {
  GenreSplit g{filter_by_genre(ds, genre), {}, {}};
  g.factors = svd(g.data.features);
  g.split = split(g.factors, s.k, selection(s, seed), genre);
  return g;
}

Matrix embedding_of(std::string_view name, const GenreSplit& g) {
  if (name == "style") return embed_style(g.data.features, g.split);
  if (name == "content") return embed_content(g.data.features, g.split);
  return g.data.features;
}

Provenance provenance(std::string command, const Global& g, std::vector<InputDigest> inputs) {
  Provenance p;
  p.command = std::move(command);
  p.seed = g.seed;
  p.inputs = std::move(inputs);
  return p;
}

std::string join_indices(std::span<const std::size_t> v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ' ';
    s += std::to_string(v[i]);
  }
  return s;
}

/// A report table rendered as CSV (plus sidecar) or as a JSON array of
/// records with embedded provenance, depending on --format.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Json>> rows;
};

std::string cell_text(const Json& v) {
  if (v.is_null()) return {};
  if (v.is_string()) return csv_field(v.get<std::string>());
  if (v.is_number_float()) return format_double(v.get<double>());
  return v.dump();
}

std::string render_csv(const Table& t) {
  std::string s;
  for (std::size_t c = 0; c < t.columns.size(); ++c) s += (c ? "," : "") + csv_field(t.columns[c]);
  s += '\n';
  for (const auto& row : t.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) s += (c ? "," : "") + cell_text(row[c]);
    s += '\n';
  }
  return s;
}

void emit_table(const fs::path& dir, const std::string& stem, const Table& t, const Provenance& prov,
                const Global& g) {
  if (g.format == "json") {
    Json records = Json::array();
    for (const auto& row : t.rows) {
      Json rec = Json::object();
      for (std::size_t c = 0; c < row.size(); ++c) rec[t.columns[c]] = row[c];
      records.push_back(std::move(rec));
    }
    write_json(dir / (stem + ".json"), Json{{"rows", std::move(records)}}, prov);
  } else {
    write_with_sidecar(dir / (stem + ".csv"), render_csv(t), prov);
  }
}

// --- validate ---------------------------------------------------------------

int cmd_validate(const DataOptions& d, std::ostream& out) {
  const auto ds = load(d);
  const auto genres = list_genres(ds);
  auto ids = game_ids(ds.metadata);
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  out << "ok: " << ds.n_rows() << " rows x " << ds.n_cols() << " cols, " << genres.size()
      << " genres, " << ids.size() << " games";
  if (ds.targets) out << ", " << ds.targets->variable_names.size() << " target variables";
  out << '\n';
  return kExitOk;
}

// --- synth ------------------------------------------------------------------

Json matrix_json(const Matrix& m) {
  Json rows = Json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const auto row = m.row(r);
    rows.push_back(std::vector<double>(row.begin(), row.end()));
  }
  return rows;
}

int cmd_synth(SynthConfig config, const Global& g, std::ostream& out) {
  config.seed = derive_seed(g.seed, Stream::Synth);
  const auto result = generate(config);
  const fs::path dir = output_dir(g);
  auto prov = provenance("synth", g, {});

  const fs::path features = dir / "features.gemb";
  const fs::path metadata = dir / "metadata.csv";
  write_with_sidecar(features, encode_matrix(result.dataset.features), prov);
  write_metadata(metadata, result.dataset.metadata);
  write_sidecar(metadata, prov);
  if (result.dataset.targets) {
    const fs::path targets = dir / "targets.gemb";
    write_with_sidecar(targets, encode_matrix(result.dataset.targets->values), prov);
    write_target_names(target_names_path(targets), result.dataset.targets->variable_names);
    write_sidecar(target_names_path(targets), prov);
  }

  Json truth;
  truth["config"] = {{"n_genres", config.n_genres},
                     {"games_per_genre", config.games_per_genre},
                     {"samples_per_game", config.samples_per_game},
                     {"latent_dim", config.latent_dim},
                     {"style_dim", config.style_dim},
                     {"content_dim", config.content_dim},
                     {"style_scale", config.style_scale},
                     {"content_scale", config.content_scale},
                     {"noise_scale", config.noise_scale},
                     {"n_target_vars", config.n_target_vars},
                     {"generator_seed", config.seed}};
  Json genres = Json::array();
  for (std::size_t i = 0; i < result.truth.genre_ids.size(); ++i) {
    genres.push_back({{"genre", result.truth.genre_ids[i]},
                      {"style_frame", matrix_json(result.truth.style_frames[i])},
                      {"content_frame", matrix_json(result.truth.content_frames[i])},
                      {"game_offsets", matrix_json(result.truth.game_offsets[i])}});
  }
  truth["genres"] = std::move(genres);
  truth["target_map"] = matrix_json(result.truth.target_map);
  write_json(dir / "ground_truth.json", std::move(truth), prov);

  out << "synth: " << result.dataset.n_rows() << " rows x " << result.dataset.n_cols()
      << " cols written to " << dir.string() << '\n';
  return kExitOk;
}

// --- decompose --------------------------------------------------------------

int cmd_decompose(const DataOptions& d, const SplitOptions& s, const Global& g, std::ostream& out) {
  const auto ds = load(d);
  const fs::path dir = output_dir(g);
  const auto inputs = digests(d);
  for (const auto& genre : genres_to_run(ds, d)) {
    const auto gs = decompose_genre(ds, genre, s, g.seed);
    auto prov = provenance("decompose", g, inputs);
    prov.genre = genre;
    prov.k = s.k;
    prov.strategy = s.strategy;

    const std::string token = file_token(genre);
    Json doc;
    doc["genre"] = genre;
    doc["k"] = gs.split.k;
    doc["dim"] = gs.split.dim;
    doc["rank"] = gs.split.rank;
    doc["null_space_dropped"] = gs.split.dim - gs.split.rank;
    doc["strategy"] = {{"variant", s.strategy}};
    if (gs.split.strategy.seed) doc["strategy"]["seed"] = *gs.split.strategy.seed;
    doc["style_indices"] = gs.split.style_indices;
    doc["content_indices"] = gs.split.content_indices;
    doc["singular_values"] = gs.factors.s;
    write_json(dir / ("split_" + token + ".json"), std::move(doc), prov);
    write_with_sidecar(dir / ("style_" + token + ".gemb"),
                       encode_matrix(embed_style(gs.data.features, gs.split)), prov);
    write_with_sidecar(dir / ("content_" + token + ".gemb"),
                       encode_matrix(embed_content(gs.data.features, gs.split)), prov);
    out << "decompose " << genre << ": style " << gs.split.style_indices.size() << " ["
        << join_indices(gs.split.style_indices) << "], content "
        << gs.split.content_indices.size() << '\n';
  }
  return kExitOk;
}

// --- sweep ------------------------------------------------------------------

int cmd_sweep(const DataOptions& d, std::vector<std::size_t> candidates, const std::string& space,
              const TsneOptions& t, const Global& g, std::ostream& out) {
  const auto ds = load(d);
  const fs::path dir = output_dir(g);
  const auto inputs = digests(d);
  const bool defaults = candidates.empty();
  const Space sp = *parse_space(space);
  GapFunction gap = silhouette_gap();
  if (sp == Space::Tsne2d) {
    const TsneConfig cfg = tsne_config(t, g.seed);
    gap = [cfg](const Matrix& e, std::span<const std::string> labels) {
      return silhouette(tsne::fit(e, cfg).coords, labels).mean_score;
    };
  }
  for (const auto& genre : genres_to_run(ds, d)) {
    const auto gd = filter_by_genre(ds, genre);
    const auto factors = svd(gd.features);
    std::vector<std::size_t> cands = candidates;
    if (defaults) {
      // The default list is clipped to what this genre's rank allows.
      for (std::size_t k : kDefaultSweepCandidates)
        if (k < factors.rank_capacity()) cands.push_back(k);
    }
    const auto ids = game_ids(gd.metadata);
    const auto result = select_k(gd.features, factors, ids, cands, gap);

    Table table{{"k", "style_silhouette", "content_silhouette", "gap_diff"}, {}};
    for (std::size_t i = 0; i < result.candidates.size(); ++i) {
      table.rows.push_back({result.candidates[i], result.style_score[i], result.content_score[i],
                            result.gap_diff[i]});
    }
    auto prov = provenance("sweep", g, inputs);
    prov.genre = genre;
    prov.k = result.chosen_k;
    prov.strategy = "top";
    prov.space = space;
    emit_table(dir, "sweep_" + file_token(genre), table, prov, g);
    out << "sweep " << genre << ": chosen_k=" << result.chosen_k << '\n';
  }
  return kExitOk;
}

// --- gap --------------------------------------------------------------------

struct ExtraInput {
  std::string name;
  fs::path path;
};

std::vector<ExtraInput> parse_extras(const std::vector<std::string>& specs) {
  std::vector<ExtraInput> out;
  for (const auto& spec : specs) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == spec.size()) {
      throw Error(ErrorCode::InvalidArgument, "--extra expects NAME=PATH, got '" + spec + "'");
    }
    out.push_back({spec.substr(0, eq), spec.substr(eq + 1)});
  }
  return out;
}

int cmd_gap(const DataOptions& d, const SplitOptions& s, const std::vector<std::string>& extra_specs,
            const std::string& space, const TsneOptions& t, const Global& g, std::ostream& out) {
  const auto ds = load(d);
  const fs::path dir = output_dir(g);
  auto inputs = digests(d);
  const auto extras_in = parse_extras(extra_specs);
  std::vector<Matrix> extra_full;
  for (const auto& e : extras_in) {
    extra_full.push_back(read_matrix(e.path));
    if (extra_full.back().rows() != ds.n_rows()) {
      throw Error(ErrorCode::DimensionMismatch,
                  "extra variant '" + e.name + "' has " + std::to_string(extra_full.back().rows()) +
                      " rows, dataset has " + std::to_string(ds.n_rows()));
    }
    inputs.push_back(digest(e.path));
  }
  const Space sp = *parse_space(space);
  const TsneConfig cfg = tsne_config(t, g.seed);

  for (const auto& genre : genres_to_run(ds, d)) {
    const auto gs = decompose_genre(ds, genre, s, g.seed);
    const auto rows = rows_of_genre(ds, genre);
    std::vector<NamedMatrix> extras;
    for (std::size_t i = 0; i < extras_in.size(); ++i) {
      extras.push_back({extras_in[i].name, extra_full[i].select_rows(rows)});
    }
    const auto report = domain_gap_report(gs.data, gs.split, extras, sp, cfg);

    std::string csv = "genre,variant,space,k,mean_silhouette\n";
    Json variants = Json::array();
    for (const auto& [name, res] : report.rows) {
      csv += csv_field(genre) + ',' + csv_field(name) + ',' + std::string(to_string(sp)) + ',' +
             std::to_string(report.k_used) + ',' + format_double(res.mean_score) + '\n';
      variants.push_back({{"variant", name},
                          {"mean_silhouette", res.mean_score},
                          {"n_clusters", res.n_clusters},
                          {"per_sample", res.per_sample}});
    }
    auto prov = provenance("gap", g, inputs);
    prov.genre = genre;
    prov.k = s.k;
    prov.strategy = s.strategy;
    prov.space = space;
    const std::string token = file_token(genre);
    write_with_sidecar(dir / ("gap_" + token + ".csv"), csv, prov);
    Json doc;
    doc["genre"] = genre;
    doc["k"] = report.k_used;
    doc["space"] = space;
    doc["null_space_dropped"] = gs.split.dim - gs.split.rank;
    doc["variants"] = std::move(variants);
    write_json(dir / ("gap_" + token + ".json"), std::move(doc), prov);

    out << "gap " << genre << ":";
    for (const auto& [name, res] : report.rows) out << ' ' << name << '=' << format_double(res.mean_score);
    out << '\n';
  }
  return kExitOk;
}

// --- probe-reg --------------------------------------------------------------

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

int cmd_probe_reg(const DataOptions& d, const SplitOptions& s,
                  const std::vector<std::string>& embeddings, std::optional<double> test_fraction,
                  const std::string& test_games, const Global& g, std::ostream& out) {
  if (d.targets.empty()) throw Error(ErrorCode::InvalidArgument, "probe-reg needs --targets");
  if (test_fraction.has_value() == !test_games.empty()) {
    throw Error(ErrorCode::InvalidArgument,
                "probe-reg needs exactly one of --test-fraction or --test-games");
  }
  const auto ds = load(d);
  const fs::path dir = output_dir(g);
  const auto inputs = digests(d);
  const auto held_out = split_list(test_games);

  for (const auto& genre : genres_to_run(ds, d)) {
    const auto gs = decompose_genre(ds, genre, s, g.seed);
    const RowSplit rows = test_fraction
                              ? random_row_split(gs.data.n_rows(), *test_fraction,
                                                 derive_seed(g.seed, Stream::RowSplit))
                              : split_by_games(gs.data.metadata, held_out);
    if (rows.train.empty() || rows.test.empty()) {
      throw Error(ErrorCode::InvalidArgument,
                  "split leaves no train or no test rows in genre '" + genre + "'");
    }
    auto prov = provenance("probe-reg", g, inputs);
    prov.genre = genre;
    prov.k = s.k;
    prov.strategy = s.strategy;
    const std::string token = file_token(genre);
    Table summary{{"embedding", "mean_r2", "n_train", "n_test", "n_skipped"}, {}};
    out << "probe-reg " << genre << ":";
    for (const auto& name : embeddings) {
      const auto report = regression_probe(embedding_of(name, gs), *gs.data.targets, rows, name);
      // Skipped (zero-variance) variables keep a row with an empty score.
      Table per_var{{"variable", "r2"}, {}};
      for (const auto& [var, r2] : report.per_variable_r2) per_var.rows.push_back({var, r2});
      for (const auto& var : report.skipped) per_var.rows.push_back({var, nullptr});
      emit_table(dir, "probe_reg_" + token + "_" + name, per_var, prov, g);
      summary.rows.push_back(
          {name, report.mean_r2, report.n_train, report.n_test, report.skipped.size()});
      out << ' ' << name << '=' << format_double(report.mean_r2);
    }
    out << '\n';
    emit_table(dir, "probe_reg_" + token, summary, prov, g);
  }
  return kExitOk;
}

// --- probe-cls --------------------------------------------------------------

int cmd_probe_cls(const DataOptions& d, const SplitOptions& s,
                  const std::vector<std::string>& embeddings, std::size_t n_folds, const Global& g,
                  std::ostream& out) {
  const auto ds = load(d);
  const fs::path dir = output_dir(g);
  const auto inputs = digests(d);
  for (const auto& genre : genres_to_run(ds, d)) {
    const auto gd = filter_by_genre(ds, genre);
    const auto labels = style_labels(gd.metadata);
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] == StyleLabel::Unknown) {
        throw Error(ErrorCode::UnknownStyleLabel, "genre '" + genre + "' row " + std::to_string(i) +
                                                      " (game '" + gd.metadata[i].game_id +
                                                      "') has style label unknown");
      }
    }
    const auto folds = make_folds(gd.metadata, n_folds, derive_seed(g.seed, Stream::Folds));
    const auto gs = decompose_genre(ds, genre, s, g.seed);

    auto prov = provenance("probe-cls", g, inputs);
    prov.genre = genre;
    prov.k = s.k;
    prov.strategy = s.strategy;
    const std::string token = file_token(genre);
    Table summary{{"embedding", "mean_accuracy", "baseline_accuracy", "n_folds"}, {}};
    double baseline = 0.0;
    out << "probe-cls " << genre << ":";
    for (const auto& name : embeddings) {
      const auto report = classification_probe(embedding_of(name, gs), labels, folds, name);
      Table per_fold{{"fold", "accuracy", "baseline"}, {}};
      for (std::size_t f = 0; f < report.n_folds; ++f) {
        per_fold.rows.push_back(
            {folds[f].fold_id, report.per_fold_accuracy[f], report.per_fold_baseline[f]});
      }
      emit_table(dir, "probe_cls_" + token + "_" + name, per_fold, prov, g);
      summary.rows.push_back({name, report.mean_accuracy, report.baseline_accuracy, report.n_folds});
      baseline = report.baseline_accuracy;
      out << ' ' << name << '=' << format_double(report.mean_accuracy);
    }
    out << " baseline=" << format_double(baseline) << '\n';
    emit_table(dir, "probe_cls_" + token, summary, prov, g);
  }
  return kExitOk;
}

// --- tsne -------------------------------------------------------------------

int cmd_tsne(const DataOptions& d, const SplitOptions& s, const std::string& embedding,
             const TsneOptions& t, const Global& g, std::ostream& out) {
  const auto ds = load(d);
  const fs::path dir = output_dir(g);
  const auto inputs = digests(d);
  const TsneConfig cfg = tsne_config(t, g.seed);
  for (const auto& genre : genres_to_run(ds, d)) {
    const auto gs = decompose_genre(ds, genre, s, g.seed);
    const auto rows = rows_of_genre(ds, genre);
    const auto emb = tsne::fit(embedding_of(embedding, gs), cfg);
    Table table{{"row", "x", "y", "game_id", "style_label"}, {}};
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto& m = gs.data.metadata[i];
      table.rows.push_back({rows[i], emb.coords(i, 0), emb.coords(i, 1), m.game_id,
                            std::string(to_string(m.style_label))});
    }
    auto prov = provenance("tsne", g, inputs);
    prov.genre = genre;
    if (embedding != "latent") {
      prov.k = s.k;
      prov.strategy = s.strategy;
    }
    emit_table(dir, "tsne_" + file_token(genre) + "_" + embedding, table, prov, g);
    out << "tsne " << genre << " " << embedding << ": final_kl=" << format_double(emb.final_kl)
        << '\n';
  }
  return kExitOk;
}

// --- report -----------------------------------------------------------------

int cmd_report(const std::string& in_dir, const Global& g, std::ostream& out) {
  const fs::path src = in_dir.empty() ? fs::path(g.out) : fs::path(in_dir);
  std::vector<fs::path> files;
  std::error_code ec;
  for (fs::directory_iterator it(src, ec), end; !ec && it != end; it.increment(ec)) {
    const auto name = it->path().filename().string();
    if (name.rfind("gap_", 0) == 0 && it->path().extension() == ".csv") files.push_back(it->path());
  }
  if (ec) throw Error(ErrorCode::IoFailure, "cannot list " + src.string());
  if (files.empty()) throw Error(ErrorCode::IoFailure, "no gap_*.csv reports in " + src.string());
  std::sort(files.begin(), files.end());

  struct Row {
    std::string genre, space, k;
    std::map<std::string, std::string> scores;
  };
  std::vector<Row> table;
  std::vector<std::string> variants;  // column order: first appearance
  std::vector<InputDigest> inputs;
  for (const auto& file : files) {
    inputs.push_back(digest(file));
    std::istringstream lines(read_file(file));
    std::string line;
    std::vector<std::string> f;
    std::getline(lines, line);
    if (line != "genre,variant,space,k,mean_silhouette") {
      throw Error(ErrorCode::InvalidMetadata, file.string() + ": unexpected header '" + line + "'");
    }
    while (std::getline(lines, line)) {
      if (line.empty()) continue;
      if (!split_csv_record(line, f) || f.size() != 5) {
        throw Error(ErrorCode::InvalidMetadata, file.string() + ": malformed row '" + line + "'");
      }
      auto row = std::find_if(table.begin(), table.end(), [&](const Row& r) { return r.genre == f[0]; });
      if (row == table.end()) {
        table.push_back({f[0], f[2], f[3], {}});
        row = std::prev(table.end());
      }
      if (std::find(variants.begin(), variants.end(), f[1]) == variants.end()) variants.push_back(f[1]);
      row->scores[f[1]] = f[4];
    }
  }

  std::string csv = "genre,space,k";
  for (const auto& v : variants) csv += ',' + csv_field(v);
  csv += '\n';
  for (const auto& r : table) {
    csv += csv_field(r.genre) + ',' + r.space + ',' + r.k;
    for (const auto& v : variants) {
      const auto it = r.scores.find(v);
      csv += ',' + (it == r.scores.end() ? std::string() : it->second);
    }
    csv += '\n';
  }
  const fs::path dir = output_dir(g);
  write_with_sidecar(dir / "summary.csv", csv, provenance("report", g, std::move(inputs)));
  out << "report: " << table.size() << " genres x " << variants.size() << " variants\n";
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Style/content decomposition of latent embedding datasets", "latent-split"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolkitVersion));

  Global global;
  app.add_option("--seed", global.seed, "Root seed for every random stream");
  app.add_option("--out", global.out, "Output directory");
  app.add_option("--format", global.format, "Report format")->check(CLI::IsMember({"csv", "json"}));

  DataOptions data;
  SplitOptions split_opts;
  TsneOptions tsne_opts;

  auto* validate_cmd = app.add_subcommand("validate", "Load and validate a dataset");
  add_data_options(validate_cmd, data, true, false);

  SynthConfig synth_cfg = standard_fixture();
  auto* synth_cmd = app.add_subcommand("synth", "Write a synthetic dataset with planted structure");
  synth_cmd->add_option("--genres", synth_cfg.n_genres);
  synth_cmd->add_option("--games-per-genre", synth_cfg.games_per_genre);
  synth_cmd->add_option("--samples-per-game", synth_cfg.samples_per_game);
  synth_cmd->add_option("--dim", synth_cfg.latent_dim);
  synth_cmd->add_option("--style-dim", synth_cfg.style_dim);
  synth_cmd->add_option("--content-dim", synth_cfg.content_dim);
  synth_cmd->add_option("--style-scale", synth_cfg.style_scale);
  synth_cmd->add_option("--content-scale", synth_cfg.content_scale);
  synth_cmd->add_option("--noise-scale", synth_cfg.noise_scale);
  synth_cmd->add_option("--target-vars", synth_cfg.n_target_vars);

  auto* decompose_cmd = app.add_subcommand("decompose", "Split each genre into style and content");
  add_data_options(decompose_cmd, data, false);
  add_split_options(decompose_cmd, split_opts);

  std::vector<std::size_t> candidates;
  std::string space = "raw";
  auto* sweep_cmd = app.add_subcommand("sweep", "Sweep k and pick the largest domain-gap difference");
  add_data_options(sweep_cmd, data, false);
  sweep_cmd->add_option("--candidates", candidates, "Comma-separated k values")
      ->delimiter(',')
      ->check(CLI::PositiveNumber);
  sweep_cmd->add_option("--space", space, "raw or tsne")->check(CLI::IsMember({"raw", "tsne"}));
  add_tsne_options(sweep_cmd, tsne_opts);

  std::vector<std::string> extras;
  auto* gap_cmd = app.add_subcommand("gap", "Domain-gap report per genre");
  add_data_options(gap_cmd, data, false);
  add_split_options(gap_cmd, split_opts);
  gap_cmd->add_option("--extra", extras, "Additional variant NAME=PATH (GEMB, all rows)");
  gap_cmd->add_option("--space", space, "raw or tsne")->check(CLI::IsMember({"raw", "tsne"}));
  add_tsne_options(gap_cmd, tsne_opts);

  std::vector<std::string> embeddings = {"latent", "content", "style"};
  std::optional<double> test_fraction;
  std::string test_games;
  auto* reg_cmd = app.add_subcommand("probe-reg", "Linear regression probe on target variables");
  add_data_options(reg_cmd, data, true);
  add_split_options(reg_cmd, split_opts);
  reg_cmd->add_option("--embeddings", embeddings)->delimiter(',')->check(CLI::IsMember(kEmbeddingNames));
  auto* frac = reg_cmd->add_option("--test-fraction", test_fraction, "Random test share of rows")
                   ->check(CLI::Range(0.0, 1.0));
  reg_cmd->add_option("--test-games", test_games, "Comma-separated held-out games")->excludes(frac);

  std::size_t n_folds = 10;
  auto* cls_cmd = app.add_subcommand("probe-cls", "Style classification probe, leave-three-games-out");
  add_data_options(cls_cmd, data, false);
  add_split_options(cls_cmd, split_opts);
  cls_cmd->add_option("--embeddings", embeddings)->delimiter(',')->check(CLI::IsMember(kEmbeddingNames));
  cls_cmd->add_option("--folds", n_folds)->check(CLI::PositiveNumber);

  std::string tsne_embedding = "latent";
  auto* tsne_cmd = app.add_subcommand("tsne", "2-D t-SNE coordinates for plotting");
  add_data_options(tsne_cmd, data, false);
  add_split_options(tsne_cmd, split_opts);
  tsne_cmd->add_option("--embedding", tsne_embedding)->check(CLI::IsMember(kEmbeddingNames));
  add_tsne_options(tsne_cmd, tsne_opts);

  std::string report_in;
  auto* report_cmd = app.add_subcommand("report", "Merge per-genre gap reports into one table");
  report_cmd->add_option("--in", report_in, "Directory holding gap_*.csv (default: --out)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  try {
    if (validate_cmd->parsed()) return cmd_validate(data, out);
    if (synth_cmd->parsed()) return cmd_synth(synth_cfg, global, out);
    if (decompose_cmd->parsed()) return cmd_decompose(data, split_opts, global, out);
    if (sweep_cmd->parsed()) return cmd_sweep(data, candidates, space, tsne_opts, global, out);
    if (gap_cmd->parsed()) return cmd_gap(data, split_opts, extras, space, tsne_opts, global, out);
    if (reg_cmd->parsed()) {
      return cmd_probe_reg(data, split_opts, embeddings, test_fraction, test_games, global, out);
    }
    if (cls_cmd->parsed()) return cmd_probe_cls(data, split_opts, embeddings, n_folds, global, out);
    if (tsne_cmd->parsed()) return cmd_tsne(data, split_opts, tsne_embedding, tsne_opts, global, out);
    if (report_cmd->parsed()) return cmd_report(report_in, global, out);
  } catch (const Error& e) {
    err << "latent-split: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "latent-split: internal error: " << e.what() << '\n';
    return kExitNumerical;
  }
  return kExitUsage;
}

}  // namespace latent_split::cli
