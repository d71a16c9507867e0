#include "co2fuse/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "co2fuse/error.hpp"
#include "co2fuse/fusion.hpp"
#include "co2fuse/importance.hpp"
#include "co2fuse/ingest.hpp"
#include "co2fuse/interpolate.hpp"
#include "co2fuse/metrics.hpp"
#include "co2fuse/models/model.hpp"
#include "co2fuse/synth.hpp"
#include "csv.hpp"

namespace co2fuse::cli {

namespace {

namespace fs = std::filesystem;
using models::ModelKind;
using models::TrainedModel;

struct Options {
  // inputs
  std::string input_dir;
  std::string soundings, stations, series, weather;
  std::string dataset = "dataset.csv";
  std::vector<std::string> model_files;
  std::string points;
  std::string out;

  // matching
  double radius_km = 25.0;
  int time_window_min = 60;
  std::string weather_window = "09:00-15:00";
  double weather_max_deg = 2.0;
  double weather_max_age_h = 6.0;
  bool no_quality_filter = false;
  std::string period_start, period_end;

  // models
  std::string model = "mlp";
  std::string holdout;
  std::uint64_t seed = 42;
  std::optional<int> epochs, batch_size, n_estimators, max_depth;
  std::optional<double> learning_rate;
  std::string decode = "argmax";
  std::optional<int> p_features;

  // grids
  std::string bbox;
  double res = 0.5;
  std::string k = "200";
  double p = 0.05;
  double epsilon_km = 1e-6;
  std::string k_list = "10,200,1000,all";
  std::string p_list = "1,0.2,0";

  // importance
  std::string method = "shapley";
  std::size_t rows = importance::kDefaultShapleyRows;
  int repeats = 5;

  // synth
  int n_stations = 12;
  int n_transects = 150;
  int soundings_per_transect = 60;
  double noise_std = 1.0;
  int days = 366;
};

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(text);
  while (std::getline(in, cur, ',')) {
    const auto t = csv::trim(cur);
    if (!t.empty()) out.emplace_back(t);
  }
  return out;
}

std::set<std::string, std::less<>> parse_holdout(const std::string& text) {
  std::set<std::string, std::less<>> ids;
  for (auto& s : split_list(text)) ids.insert(s);
  return ids;
}

std::string require(const std::string& value, const char* flag) {
  if (value.empty()) throw Error(ErrorKind::Usage, std::string(flag) + " is required");
  return value;
}

std::string resolve_input(const Options& o, const std::string& explicit_path, const char* file,
                          const char* flag) {
  if (!explicit_path.empty()) return explicit_path;
  if (!o.input_dir.empty()) return (fs::path(o.input_dir) / file).string();
  throw Error(ErrorKind::Usage, std::string(flag) + " or --input-dir is required");
}

Timestamp parse_time_flag(const std::string& text, const char* flag) {
  const auto t = parse_rfc3339(text);
  if (!t) throw Error(ErrorKind::Usage, std::string(flag) + ": not an RFC3339 timestamp: " + text);
  return *t;
}

fusion::MatchConfig match_config(const Options& o) {
  fusion::MatchConfig cfg;
  cfg.max_distance_km = o.radius_km;
  cfg.max_time_minutes = o.time_window_min;
  cfg.max_weather_distance_deg = o.weather_max_deg;
  cfg.max_weather_age_seconds = static_cast<std::int64_t>(o.weather_max_age_h * kSecondsPerHour);
  fusion::validate(cfg);
  return cfg;
}

ingest::WeatherReadOptions weather_options(const Options& o) {
  const auto w = parse_daily_window(o.weather_window);
  if (!w) throw Error(ErrorKind::Usage, "--weather-window must be HH:MM-HH:MM");
  return ingest::WeatherReadOptions{*w};
}

ingest::SoundingReadOptions sounding_options(const Options& o) {
  ingest::SoundingReadOptions opt;
  opt.quality_filter = !o.no_quality_filter;
  if (!o.period_start.empty()) opt.period_start = parse_time_flag(o.period_start, "--period-start");
  if (!o.period_end.empty()) opt.period_end = parse_time_flag(o.period_end, "--period-end");
  return opt;
}

void print_report(std::ostream& out, const char* label, const ingest::ReadReport& r) {
  out << label << ": " << r.data_rows << " rows, " << r.malformed << " malformed, " << r.filtered
      << " filtered\n";
}

std::string out_or(const Options& o, const char* fallback) {
  return o.out.empty() ? std::string(fallback) : o.out;
}

// --- build-dataset -------------------------------------------------------------

int cmd_build_dataset(const Options& o, std::ostream& out) {
  const auto cfg = match_config(o);
  const auto sounding_path = resolve_input(o, o.soundings, synth::kSoundingsFile, "--soundings");
  const auto station_path = resolve_input(o, o.stations, synth::kStationsFile, "--stations");
  const auto series_path = resolve_input(o, o.series, synth::kSeriesFile, "--series");
  const auto weather_path = resolve_input(o, o.weather, synth::kWeatherFile, "--weather");

  const auto soundings = ingest::read_soundings(sounding_path, sounding_options(o));
  const auto catalog = ingest::read_station_catalog(station_path);
  const auto series = ingest::read_station_series(series_path);
  const auto weather = ingest::read_weather(weather_path, weather_options(o));
  print_report(out, "soundings", soundings.report);
  out << "stations: " << catalog.size() << '\n';
  print_report(out, "station series", series.report);
  print_report(out, "weather", weather.report);

  const fusion::StationIndex index(catalog, series.records);
  const auto built = fusion::build_dataset(soundings.records, index, weather.archive, cfg);
  const auto path = out_or(o, "dataset.csv");
  fusion::write_dataset(path, built.samples);

  const auto& r = built.report;
  out << "matched " << r.matched << " of " << r.soundings << " soundings (match rate "
      << std::fixed << std::setprecision(4) << r.match_rate() << std::defaultfloat << "); "
      << r.no_station << " without station, " << r.stale_weather << " stale weather\n";
  out << "wrote " << built.samples.size() << " samples to " << path << '\n';
  return 0;
}

// --- train / evaluate ----------------------------------------------------------

TrainedModel train_kind(ModelKind kind, std::span<const fusion::LabeledSample> train,
                        const Options& o) {
  const std::uint64_t seed = o.seed + kTrainSeedOffset;
  TrainedModel m;
  switch (kind) {
    case ModelKind::Baseline:
      m.model = models::train_baseline(train);
      break;
    case ModelKind::Gbt: {
      models::GbtConfig cfg;
      cfg.seed = seed;
      if (o.n_estimators) cfg.n_estimators = *o.n_estimators;
      if (o.max_depth) cfg.max_depth = *o.max_depth;
      if (o.learning_rate) cfg.learning_rate = *o.learning_rate;
      m.model = models::train_gbt(train, cfg).model;
      break;
    }
    case ModelKind::CatBoost: {
      models::CatBoostConfig cfg;
      cfg.seed = seed;
      if (o.n_estimators) cfg.iterations = *o.n_estimators;
      if (o.max_depth) cfg.max_depth = *o.max_depth;
      if (o.learning_rate) cfg.learning_rate = *o.learning_rate;
      if (o.decode == "expectation") {
        cfg.decode = models::CatDecode::Expectation;
      } else if (o.decode != "argmax") {
        throw Error(ErrorKind::Usage, "--decode must be argmax or expectation");
      }
      m.model = models::train_catboost(train, cfg);
      break;
    }
    case ModelKind::Mlp: {
      models::MlpConfig cfg;
      cfg.seed = seed;
      if (o.epochs) cfg.epochs = *o.epochs;
      if (o.batch_size) {
        if (*o.batch_size < 1) throw Error(ErrorKind::Usage, "--batch-size must be >= 1");
        cfg.batch_size = static_cast<std::size_t>(*o.batch_size);
      }
      if (o.learning_rate) cfg.learning_rate = *o.learning_rate;
      m.model = models::train_mlp(train, cfg).model;
      break;
    }
  }
  return m;
}

fusion::Split load_split(const Options& o, bool holdout_required) {
  const auto data = fusion::read_dataset(o.dataset);
  if (o.holdout.empty()) {
    if (holdout_required) throw Error(ErrorKind::Usage, "--holdout-stations is required");
    return fusion::Split{data, {}};
  }
  return fusion::split_by_station(data, parse_holdout(o.holdout));
}

int cmd_train(const Options& o, std::ostream& out) {
  const ModelKind kind = models::parse_model_kind(o.model);
  const auto split = load_split(o, false);
  const auto model = train_kind(kind, split.train, o);
  const auto path = out_or(o, "model.txt");
  models::save(model, fs::path(path));
  out << "trained " << models::to_string(kind) << " on " << split.train.size() << " samples";
  if (!split.test.empty()) out << " (" << split.test.size() << " held out)";
  out << "; wrote " << path << '\n';
  return 0;
}

int cmd_evaluate(const Options& o, std::ostream& out) {
  const auto split = load_split(o, true);
  if (split.train.empty()) throw Error(ErrorKind::EmptyDataset, "every station is held out");

  std::vector<TrainedModel> trained;
  if (!o.model_files.empty()) {
    for (const auto& f : o.model_files) trained.push_back(models::load(fs::path(f)));
  } else {
    auto kinds = split_list(o.model);
    if (kinds.size() == 1 && kinds[0] == "all") kinds = {"baseline", "gbt", "catboost", "mlp"};
    for (const auto& k : kinds) trained.push_back(train_kind(models::parse_model_kind(k), split.train, o));
  }

  const auto x = fusion::features_of(split.test);
  const auto y = fusion::labels_of(split.test);
  std::ostringstream table;
  table << "model,n,p,mse,rmse,adj_r2\n";
  for (const auto& m : trained) {
    const auto yhat = models::predict_all(m, x);
    const std::size_t p =
        o.p_features ? static_cast<std::size_t>(*o.p_features) : models::default_p_features(m.kind());
    const auto r = metrics::evaluate(y, yhat, p);
    table << models::to_string(m.kind()) << ',' << r.n << ',' << r.p_features << ','
          << csv::format_double(r.mse) << ',' << csv::format_double(r.rmse) << ','
          << csv::format_double(r.adj_r2) << '\n';
  }
  const auto path = out_or(o, "metrics.csv");
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw Error(ErrorKind::Io, "cannot write " + path);
  file << table.str();
  out << table.str();
  return 0;
}

// --- predict-grid / sweep ------------------------------------------------------

struct PointSet {
  std::vector<interpolate::ValuedPoint> points;
  std::size_t soundings = 0;
  std::size_t stale = 0;
};

PointSet predicted_points(const Options& o) {
  const auto model = models::load(fs::path(require(o.model_files.empty() ? "" : o.model_files[0],
                                                   "--model-file")));
  const auto cfg = match_config(o);
  const auto soundings = ingest::read_soundings(resolve_input(o, o.soundings, synth::kSoundingsFile, "--soundings"),
                                                sounding_options(o));
  const auto weather = ingest::read_weather(resolve_input(o, o.weather, synth::kWeatherFile, "--weather"),
                                            weather_options(o));
  PointSet set;
  set.soundings = soundings.records.size();
  for (const auto& s : soundings.records) {
    try {
      const auto& w = fusion::nearest_weather(s, weather.archive, cfg);
      set.points.push_back({s.location, models::predict(model, fusion::make_features(s, w))});
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::StaleWeather) throw;
      ++set.stale;
    }
  }
  if (set.points.empty()) throw Error(ErrorKind::NoData, "no sounding could be predicted");
  return set;
}

PointSet read_points(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path);
  const auto header = csv::read_header(in, path);
  const csv::Header cols(header, {"latitude_deg", "longitude_deg", "co2_ppm"}, path);
  PointSet set;
  std::string line;
  std::vector<std::string> f;
  while (std::getline(in, line)) {
    if (csv::is_blank(line)) continue;
    if (!csv::split_line(line, f) || f.size() <= cols.max_index()) {
      throw Error(ErrorKind::Schema, path + ": bad row: " + line);
    }
    const auto lat = csv::parse_finite(f[cols[0]]);
    const auto lon = csv::parse_finite(f[cols[1]]);
    const auto v = csv::parse_finite(f[cols[2]]);
    const auto pt = lat && lon ? geo::try_make_point(*lat, *lon) : std::nullopt;
    if (!pt || !v) throw Error(ErrorKind::Schema, path + ": bad row: " + line);
    set.points.push_back({*pt, *v});
  }
  set.soundings = set.points.size();
  if (set.points.empty()) throw Error(ErrorKind::NoData, path + ": no points");
  return set;
}

geo::GridSpec grid_spec(const Options& o) {
  return geo::make_grid_spec(geo::parse_bbox(require(o.bbox, "--bbox")), o.res);
}

int cmd_predict_grid(const Options& o, std::ostream& out) {
  const auto spec = grid_spec(o);
  const interpolate::KnnParams params{interpolate::parse_k(o.k), o.p, o.epsilon_km};
  interpolate::validate(params);
  const PointSet set = o.points.empty() ? predicted_points(o) : read_points(o.points);
  const auto grid = interpolate::rasterize(set.points, spec, params);

  fs::path stem = out_or(o, "grid");
  if (stem.has_extension()) stem.replace_extension();
  const auto with = [&](const char* ext) { return fs::path(stem.string() + ext); };
  interpolate::write_grid_csv(with(".csv"), grid);
  interpolate::write_ascii_grid(with(".asc"), grid);
  interpolate::Metadata meta{
      {"k", interpolate::format_k(params.k)},
      {"p", csv::format_double(params.p)},
      {"epsilon_km", csv::format_double(params.epsilon_km)},
      {"points", std::to_string(set.points.size())},
      {"skipped_stale_weather", std::to_string(set.stale)},
  };
  if (!o.model_files.empty() && o.points.empty()) meta["model_file"] = o.model_files[0];
  if (!o.points.empty()) meta["points_file"] = o.points;
  interpolate::write_pgm(with(".pgm"), with(".pgm.meta"), grid, meta);

  out << "interpolated " << set.points.size() << " points onto " << spec.rows() << "x"
      << spec.cols() << " cells (k=" << interpolate::format_k(params.k)
      << ", p=" << csv::format_double(params.p) << "); mean " << csv::format_double(grid.stats.mean)
      << " ppm, std " << csv::format_double(grid.stats.std) << " ppm\n";
  out << "wrote " << stem.string() << ".{csv,asc,pgm,pgm.meta}\n";
  return 0;
}

int cmd_sweep(const Options& o, std::ostream& out) {
  const auto spec = grid_spec(o);
  std::vector<std::size_t> ks;
  for (const auto& t : split_list(o.k_list)) ks.push_back(interpolate::parse_k(t));
  std::vector<double> ps;
  for (const auto& t : split_list(o.p_list)) {
    const auto v = csv::parse_finite(t);
    if (!v) throw Error(ErrorKind::Usage, "--p-list: not a number: " + t);
    ps.push_back(*v);
  }
  const PointSet set = o.points.empty() ? predicted_points(o) : read_points(o.points);
  const auto rows = interpolate::sweep(set.points, spec, ks, ps, o.epsilon_km);
  const auto path = out_or(o, "sweep.csv");
  interpolate::write_sweep_csv(path, rows);
  for (const auto& r : rows) {
    out << "k=" << interpolate::format_k(r.k) << " p=" << csv::format_double(r.p)
        << " mean=" << csv::format_double(r.mean) << " std=" << csv::format_double(r.std) << '\n';
  }
  out << "wrote " << rows.size() << " rows to " << path << '\n';
  return 0;
}

// --- importance / synth --------------------------------------------------------

int cmd_importance(const Options& o, std::ostream& out) {
  const auto model = models::load(fs::path(require(o.model_files.empty() ? "" : o.model_files[0],
                                                   "--model-file")));
  const auto split = load_split(o, false);
  const importance::Predictor f = [&model](const fusion::FeatureVector& x) {
    return models::predict(model, x);
  };
  const std::uint64_t seed = o.seed + kImportanceSeedOffset;
  // explain held-out rows against the training background when a holdout is given
  const auto& explained = split.test.empty() ? split.train : split.test;

  importance::AttributionReport report;
  if (o.method == "shapley") {
    const auto bg = fusion::features_of(split.train);
    const auto rows = fusion::features_of(explained);
    report = importance::shapley_attribution(f, rows, bg, seed, o.rows);
  } else if (o.method == "permutation") {
    report = importance::permutation_importance(f, explained, o.repeats, seed);
  } else {
    throw Error(ErrorKind::Usage, "--method must be shapley or permutation");
  }
  const auto path = out_or(o, "importance.csv");
  importance::write_report_csv(fs::path(path), report);
  out << importance::to_string(report.method) << " attribution over " << report.rows_explained
      << " rows, baseline " << csv::format_double(report.baseline) << " ppm\n";
  out << importance::format_bars(report);
  out << "wrote " << path << '\n';
  return 0;
}

int cmd_synth(const Options& o, std::ostream& out) {
  synth::SynthConfig cfg;
  cfg.seed = o.seed + kSynthSeedOffset;
  if (!o.bbox.empty()) cfg.bbox = geo::parse_bbox(o.bbox);
  cfg.n_stations = o.n_stations;
  cfg.n_transects = o.n_transects;
  cfg.soundings_per_transect = o.soundings_per_transect;
  cfg.noise_std = o.noise_std;
  cfg.days = o.days;
  const auto campaign = synth::generate_campaign(cfg);
  const auto dir = out_or(o, "campaign");
  synth::write_campaign(dir, campaign);
  out << "wrote " << campaign.soundings.size() << " soundings, " << campaign.stations.size()
      << " stations, " << campaign.series.size() << " station hours, " << campaign.weather.size()
      << " weather samples to " << dir << '\n';
  return 0;
}

// --- config file ---------------------------------------------------------------

bool has_flag(const std::vector<std::string>& args, const std::string& flag) {
  return std::any_of(args.begin(), args.end(), [&](const std::string& a) {
    return a == flag || a.rfind(flag + "=", 0) == 0;
  });
}

std::optional<std::string> flag_value(const std::vector<std::string>& args, const std::string& flag) {
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == flag && i + 1 < args.size()) return args[i + 1];
    if (args[i].rfind(flag + "=", 0) == 0) return args[i].substr(flag.size() + 1);
  }
  return std::nullopt;
}

// Appends `--key value` for every config-file entry whose flag is absent from
// the command line, so explicit flags always win.
void merge_config(CLI::App& app, std::vector<std::string>& args) {
  const auto path = flag_value(args, "--config");
  if (!path || args.empty()) return;
  CLI::App* sub = nullptr;
  for (auto* s : app.get_subcommands({})) {
    if (s->get_name() == args.front()) sub = s;
  }
  if (sub == nullptr) return;

  std::ifstream in(*path);
  if (!in) throw Error(ErrorKind::Io, "cannot open config file " + *path);
  std::vector<std::string> extra;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (csv::trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorKind::Usage, *path + ":" + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key(csv::trim(std::string_view(line).substr(0, eq)));
    const std::string value(csv::trim(std::string_view(line).substr(eq + 1)));
    const std::string flag = "--" + key;
    const CLI::Option* opt = sub->get_option_no_throw(flag);
    if (key == "config" || key == "help" || opt == nullptr) {
      throw Error(ErrorKind::Usage, *path + ":" + std::to_string(lineno) + ": unknown key '" + key +
                                        "' for " + sub->get_name());
    }
    if (has_flag(args, flag)) continue;
    if (opt->get_type_size() == 0) {
      if (value == "true" || value == "1") extra.push_back(flag);
      continue;
    }
    extra.push_back(flag);
    extra.push_back(value);
  }
  args.insert(args.end(), extra.begin(), extra.end());
}

void add_shared(CLI::App* s, Options& o) {
  s->add_option("--config", "key = value file; command-line flags take precedence");
  s->add_option("--seed", o.seed, "Master seed")->capture_default_str();
  s->add_option("--out", o.out, "Output path");
}

void add_inputs(CLI::App* s, Options& o, bool stations) {
  s->add_option("--input-dir", o.input_dir, "Directory holding the standard CSV names");
  s->add_option("--soundings", o.soundings, "soundings.csv");
  if (stations) {
    s->add_option("--stations", o.stations, "stations.csv");
    s->add_option("--series", o.series, "station_series.csv");
  }
  s->add_option("--weather", o.weather, "weather.csv");
  s->add_option("--radius-km", o.radius_km, "Max sounding-station distance")->capture_default_str();
  s->add_option("--time-window-min", o.time_window_min, "Max sounding-observation time gap")
      ->capture_default_str();
  s->add_option("--weather-window", o.weather_window, "Daily UTC window for weather samples")
      ->capture_default_str();
  s->add_option("--weather-max-deg", o.weather_max_deg, "Max distance to a weather node")
      ->capture_default_str();
  s->add_option("--weather-max-age-h", o.weather_max_age_h, "Max weather sample age")
      ->capture_default_str();
  s->add_flag("--no-quality-filter", o.no_quality_filter, "Keep soundings with quality_flag != 0");
  s->add_option("--period-start", o.period_start, "Earliest sounding time (RFC3339)");
  s->add_option("--period-end", o.period_end, "Latest sounding time (RFC3339)");
}

void add_model_opts(CLI::App* s, Options& o) {
  s->add_option("--dataset", o.dataset, "dataset.csv from build-dataset")->capture_default_str();
  s->add_option("--holdout-stations", o.holdout, "Comma-separated station ids held out");
  s->add_option("--model", o.model, "baseline|gbt|catboost|mlp")->capture_default_str();
  s->add_option("--epochs", o.epochs, "MLP epochs");
  s->add_option("--batch-size", o.batch_size, "MLP batch size");
  s->add_option("--learning-rate", o.learning_rate, "Learning rate of the chosen model");
  s->add_option("--n-estimators", o.n_estimators, "Boosting rounds");
  s->add_option("--max-depth", o.max_depth, "Tree depth");
  s->add_option("--decode", o.decode, "Category model decode: argmax|expectation")
      ->capture_default_str();
}

void add_grid_opts(CLI::App* s, Options& o) {
  s->add_option("--bbox", o.bbox, "S,W,N,E in degrees");
  s->add_option("--res", o.res, "Cell size in degrees")->capture_default_str();
  s->add_option("--model-file", o.model_files, "Trained model");
  s->add_option("--points", o.points, "CSV with latitude_deg,longitude_deg,co2_ppm instead of a model");
  s->add_option("--epsilon-km", o.epsilon_km, "Distance floor")->capture_default_str();
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Fuse satellite xCO2 soundings, station CO2 and weather into CO2 maps", "co2fuse"};
  app.require_subcommand(1, 1);

  auto* build = app.add_subcommand("build-dataset", "Match soundings to stations and weather");
  add_shared(build, o);
  add_inputs(build, o, true);

  auto* train = app.add_subcommand("train", "Train one model on non-holdout stations");
  add_shared(train, o);
  add_model_opts(train, o);

  auto* evaluate = app.add_subcommand("evaluate", "Score models on holdout stations");
  add_shared(evaluate, o);
  add_model_opts(evaluate, o);
  evaluate->add_option("--model-file", o.model_files, "Evaluate saved models instead of training");
  evaluate->add_option("--p-features", o.p_features, "p for adjusted R2 (default 1 baseline, 14 others)");

  auto* predict = app.add_subcommand("predict-grid", "Predict at soundings and interpolate to a grid");
  add_shared(predict, o);
  add_inputs(predict, o, false);
  add_grid_opts(predict, o);
  predict->add_option("--k", o.k, "Neighbors, integer or 'all'")->capture_default_str();
  predict->add_option("--p", o.p, "Distance exponent")->capture_default_str();

  auto* sweep = app.add_subcommand("sweep", "Grid statistics over a K x p table");
  add_shared(sweep, o);
  add_inputs(sweep, o, false);
  add_grid_opts(sweep, o);
  sweep->add_option("--k-list", o.k_list, "Comma-separated K values")->capture_default_str();
  sweep->add_option("--p-list", o.p_list, "Comma-separated p values")->capture_default_str();

  auto* imp = app.add_subcommand("importance", "Feature attribution for a saved model");
  add_shared(imp, o);
  imp->add_option("--model-file", o.model_files, "Trained model");
  imp->add_option("--dataset", o.dataset, "dataset.csv")->capture_default_str();
  imp->add_option("--holdout-stations", o.holdout, "Explain these stations against the rest");
  imp->add_option("--method", o.method, "shapley|permutation")->capture_default_str();
  imp->add_option("--rows", o.rows, "Max rows explained by shapley")->capture_default_str();
  imp->add_option("--repeats", o.repeats, "Shuffles per feature for permutation")->capture_default_str();

  auto* syn = app.add_subcommand("synth", "Write a synthetic campaign directory");
  add_shared(syn, o);
  syn->add_option("--bbox", o.bbox, "S,W,N,E in degrees");
  syn->add_option("--n-stations", o.n_stations)->capture_default_str();
  syn->add_option("--n-transects", o.n_transects)->capture_default_str();
  syn->add_option("--soundings-per-transect", o.soundings_per_transect)->capture_default_str();
  syn->add_option("--noise-std", o.noise_std, "ppm")->capture_default_str();
  syn->add_option("--days", o.days)->capture_default_str();

  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);

  try {
    merge_config(app, args);
    std::reverse(args.begin(), args.end());
    app.parse(args);

    if (*build) return cmd_build_dataset(o, out);
    if (*train) return cmd_train(o, out);
    if (*evaluate) return cmd_evaluate(o, out);
    if (*predict) return cmd_predict_grid(o, out);
    if (*sweep) return cmd_sweep(o, out);
    if (*imp) return cmd_importance(o, out);
    if (*syn) return cmd_synth(o, out);
    return 64;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 64;
  } catch (const Error& e) {
    err << "co2fuse: " << e.what() << '\n';
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    err << "co2fuse: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace co2fuse::cli
