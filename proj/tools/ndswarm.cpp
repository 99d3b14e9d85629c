// ndswarm command line: batch projection, reports, exports and the server.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "ndswarm/api.hpp"
#include "ndswarm/dataset.hpp"
#include "ndswarm/gltf.hpp"
#include "ndswarm/projection.hpp"
#include "ndswarm/scene.hpp"
#include "ndswarm/server.hpp"
#include "ndswarm/session.hpp"

namespace {

using namespace ndswarm;

struct CsvFlags {
  std::string label_column;
  std::string delimiter = ",";
  std::string missing = "drop-point";

  void add_to(CLI::App* app) {
    app->add_option("--label-column", label_column, "Non-numeric column holding point labels");
    app->add_option("--delimiter", delimiter, "Field separator (one character or 'tab')");
    app->add_option("--missing", missing, "Missing-value policy: drop-point or strict")->capture_default_str();
  }

  CsvOptions options() const {
    CsvOptions o;
    if (!label_column.empty()) o.label_column = label_column;
    if (delimiter == "tab" || delimiter == "\\t") {
      o.delimiter = '\t';
    } else if (delimiter.size() == 1) {
      o.delimiter = delimiter[0];
    } else {
      throw std::invalid_argument("--delimiter must be a single character");
    }
    o.missing_policy = parse_missing_policy(missing);
    return o;
  }
};

struct ViewFlags {
  double slab_threshold = kDefaultSlabThreshold;
  std::string slab_mode = "post_view";
  std::vector<std::string> rotations;
  std::vector<double> translation;
  double camera_d = kDefaultCameraDistance;
  double sigma_range = 3.0;

  void add_to(CLI::App* app) {
    app->add_option("--slab-threshold", slab_threshold, "Slab half-thickness")->capture_default_str();
    app->add_option("--slab-mode", slab_mode, "post_view or pre_view")->capture_default_str();
    app->add_option("--rotate", rotations, "PLANE=degrees, applied in order (XY XZ XT YZ YT ZT)");
    app->add_option("--translate", translation, "Four translation offsets x y z t")->expected(4)->delimiter(',');
    app->add_option("--camera-d", camera_d, "Camera distance along T")->capture_default_str();
    app->add_option("--sigma-range", sigma_range, "Visual calibration window in sigmas")->capture_default_str();
  }

  ViewState view() const {
    ViewState vs;
    for (const auto& r : rotations) {
      const auto eq = r.find('=');
      if (eq == std::string::npos) throw std::invalid_argument("--rotate expects PLANE=degrees, got '" + r + "'");
      const auto plane = parse_plane(r.substr(0, eq));
      if (!plane) throw std::invalid_argument("unknown rotation plane in '" + r + "'");
      std::size_t used = 0;
      const double deg = std::stod(r.substr(eq + 1), &used);
      if (used != r.size() - eq - 1) throw std::invalid_argument("bad angle in '" + r + "'");
      vs = rotate(vs, *plane, deg * std::numbers::pi / 180.0);
    }
    if (!translation.empty()) vs = translate(vs, Vector4(translation[0], translation[1], translation[2], translation[3]));
    return vs;
  }

  FrameSettings settings() const {
    FrameSettings s;
    s.slab.threshold = slab_threshold;
    const auto mode = parse_slab_mode(slab_mode);
    if (!mode) throw std::invalid_argument("unknown slab mode '" + slab_mode + "'");
    s.slab.mode = *mode;
    s.camera.d = camera_d;
    s.calibration.sigma_range = sigma_range;
    return s;
  }
};

nlohmann::json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  return nlohmann::json::parse(in);
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text << '\n';
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << text << '\n';
}

DimensionAssignment load_assignment(const std::string& path, const Dataset& ds) {
  auto asgn = assignment_from_json(read_json(path), ds);
  require_valid(asgn, static_cast<std::size_t>(ds.dims()));
  return asgn;
}

SceneFrame frame_for(const std::string& csv, const CsvFlags& csv_flags, const std::string& assign,
                     const ViewFlags& view_flags) {
  const Dataset ds = load_csv(csv, csv_flags.options());
  const auto asgn = load_assignment(assign, ds);
  const auto projected = project(ds, asgn);
  return build_frame(projected, view_flags.view(), view_flags.settings(), ds.labels(), 1, 0);
}

void print_inspect(const Dataset& ds, bool as_json) {
  const auto summary = summarize(ds);
  if (as_json) {
    nlohmann::json j = {{"source", ds.source()}, {"n_points", ds.points()}, {"n_dims", ds.dims()}};
    auto dims = nlohmann::json::array();
    for (const auto& s : summary) {
      dims.push_back({{"name", s.name}, {"min", s.min}, {"max", s.max}, {"mean", s.mean},
                      {"stddev", s.stddev}, {"distinct", s.distinct}});
    }
    j["dimensions"] = dims;
    std::cout << j.dump(2) << '\n';
    return;
  }
  std::printf("%s: %lld points, %lld dimensions%s\n", ds.source().c_str(), static_cast<long long>(ds.points()),
              static_cast<long long>(ds.dims()), ds.labels() ? ", labelled" : "");
  std::size_t width = 4;
  for (const auto& s : summary) width = std::max(width, s.name.size());
  std::printf("%-*s %14s %14s %14s %14s %9s\n", static_cast<int>(width), "name", "min", "max", "mean",
              "stddev", "distinct");
  for (const auto& s : summary) {
    std::printf("%-*s %14.6g %14.6g %14.6g %14.6g %9zu\n", static_cast<int>(width), s.name.c_str(), s.min,
                s.max, s.mean, s.stddev, s.distinct);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ndswarm: n-dimensional data as a swarm of avatars"};
  app.require_subcommand(1);

  // inspect
  auto* inspect = app.add_subcommand("inspect", "Per-dimension summary of a CSV file");
  std::string inspect_csv;
  CsvFlags inspect_flags;
  bool inspect_json = false;
  inspect->add_option("csv", inspect_csv, "Input CSV")->required();
  inspect_flags.add_to(inspect);
  inspect->add_flag("--json", inspect_json, "Print JSON instead of a table");

  // project
  auto* project_cmd = app.add_subcommand("project", "Build one scene frame");
  std::string project_csv, project_assign, project_out;
  CsvFlags project_csv_flags;
  ViewFlags project_view;
  project_cmd->add_option("csv", project_csv, "Input CSV")->required();
  project_cmd->add_option("--assign", project_assign, "Assignment JSON")->required();
  project_cmd->add_option("--out", project_out, "Frame JSON output (default stdout)");
  project_csv_flags.add_to(project_cmd);
  project_view.add_to(project_cmd);

  // pca-report
  auto* pca_cmd = app.add_subcommand("pca-report", "PCA loadings of the anonymous dimensions");
  std::string pca_csv, pca_assign, pca_out, pca_scope = "anonymous";
  CsvFlags pca_csv_flags;
  bool pca_covariance = false;
  pca_cmd->add_option("csv", pca_csv, "Input CSV")->required();
  pca_cmd->add_option("--assign", pca_assign, "Assignment JSON")->required();
  pca_cmd->add_option("--scope", pca_scope, "anonymous or anonymous_and_spatial")->capture_default_str();
  pca_cmd->add_flag("--covariance", pca_covariance, "Decompose centered raw values instead of z-scores");
  pca_cmd->add_option("--out", pca_out, "Report JSON output (default stdout)");
  pca_csv_flags.add_to(pca_cmd);

  // export-gltf
  auto* gltf_cmd = app.add_subcommand("export-gltf", "Write the frame as glTF 2.0 (.glb or .gltf)");
  std::string gltf_csv, gltf_assign, gltf_frame, gltf_out;
  CsvFlags gltf_csv_flags;
  ViewFlags gltf_view;
  GltfOptions gltf_options;
  gltf_cmd->add_option("csv", gltf_csv, "Input CSV (or use --frame)");
  gltf_cmd->add_option("--assign", gltf_assign, "Assignment JSON");
  gltf_cmd->add_option("--frame", gltf_frame, "Existing frame JSON instead of a CSV");
  gltf_cmd->add_option("--out", gltf_out, "Output .glb or .gltf")->required();
  gltf_cmd->add_option("--lod", gltf_options.lod, "Glyph level of detail (0-2)")
      ->check(CLI::Range(kLowestLod, kHighestLod))
      ->capture_default_str();
  gltf_cmd->add_option("--glyph-size", gltf_options.glyph_size, "Glyph radius at scale 1")->capture_default_str();
  gltf_csv_flags.add_to(gltf_cmd);
  gltf_view.add_to(gltf_cmd);

  // synth
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic dataset as CSV");
  std::string synth_archetype = "politicians", synth_out;
  SynthSpec synth_spec;
  synth_cmd->add_option("--archetype", synth_archetype, "politicians or drinks")->capture_default_str();
  synth_cmd->add_option("--n", synth_spec.points, "Number of points")->capture_default_str();
  synth_cmd->add_option("--seed", synth_spec.seed, "Random seed")->capture_default_str();
  synth_cmd->add_option("--out", synth_out, "CSV output (default stdout)");

  // serve
  auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP/WebSocket API");
  std::optional<int> serve_port;
  ServerOptions serve_options;
  std::string serve_data_dir;
  std::vector<std::string> serve_preload;
  CsvFlags serve_csv_flags;
  serve_cmd->add_option("--port", serve_port, "Listen port (else ND_SWARM_PORT, else 8080)");
  serve_cmd->add_option("--host", serve_options.address, "Listen address")->capture_default_str();
  serve_cmd->add_option("--max-push-rate", serve_options.max_push_rate, "WebSocket frames per second")
      ->capture_default_str();
  serve_cmd->add_option("--data-dir", serve_data_dir, "Directory persisting uploaded datasets");
  serve_cmd->add_option("--load", serve_preload, "CSV files to register at startup");
  serve_csv_flags.add_to(serve_cmd);

  // replay
  auto* replay_cmd = app.add_subcommand("replay", "Replay a JSONL command log");
  std::string replay_log, replay_frames;
  replay_cmd->add_option("log", replay_log, "Command log")->required();
  replay_cmd->add_option("--frames-out", replay_frames, "Write every frame, one per line");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*inspect) {
      print_inspect(load_csv(inspect_csv, inspect_flags.options()), inspect_json);
    } else if (*project_cmd) {
      write_text(project_out,
                 serialize_frame(frame_for(project_csv, project_csv_flags, project_assign, project_view)));
    } else if (*pca_cmd) {
      const Dataset ds = load_csv(pca_csv, pca_csv_flags.options());
      PcaReportOptions opts;
      if (pca_scope == "anonymous") {
        opts.scope = PcaScope::Anonymous;
      } else if (pca_scope == "anonymous_and_spatial") {
        opts.scope = PcaScope::AnonymousAndSpatial;
      } else {
        throw std::invalid_argument("unknown --scope '" + pca_scope + "'");
      }
      opts.standardize_inputs = !pca_covariance;
      const auto report = pca_report(ds, load_assignment(pca_assign, ds), opts);
      write_text(pca_out, pca_report_to_json(report).dump(2));
    } else if (*gltf_cmd) {
      SceneFrame frame;
      if (!gltf_frame.empty()) {
        std::ifstream in(gltf_frame);
        if (!in) throw std::runtime_error("cannot open '" + gltf_frame + "'");
        std::stringstream text;
        text << in.rdbuf();
        frame = parse_frame(text.str());
      } else {
        if (gltf_csv.empty() || gltf_assign.empty()) {
          throw std::invalid_argument("export-gltf needs either --frame or a CSV with --assign");
        }
        frame = frame_for(gltf_csv, gltf_csv_flags, gltf_assign, gltf_view);
      }
      export_gltf(frame, gltf_out, gltf_options);
      std::cerr << "wrote " << frame.n_visible() << " glyphs to " << gltf_out << '\n';
    } else if (*synth_cmd) {
      synth_spec.archetype = parse_archetype(synth_archetype);
      const Dataset ds = generate_synthetic(synth_spec);
      std::ostringstream out;
      write_csv(ds, out);
      std::string text = out.str();
      if (!text.empty() && text.back() == '\n') text.pop_back();
      write_text(synth_out, text);
    } else if (*serve_cmd) {
      auto store = serve_data_dir.empty() ? std::make_shared<DatasetStore>()
                                          : std::make_shared<DatasetStore>(serve_data_dir);
      for (const auto& path : serve_preload) {
        const auto id = store->load(path, serve_csv_flags.options());
        std::cerr << "dataset " << id << " <- " << path << '\n';
      }
      serve_options.port = resolve_port(serve_port, std::getenv("ND_SWARM_PORT"));
      auto api = std::make_shared<Api>(std::make_shared<SessionRegistry>(store));
      Server server(api, serve_options);
      server.start();
      std::cerr << "listening on " << serve_options.address << ':' << server.port() << '\n';
      server.run();
    } else if (*replay_cmd) {
      const auto result = replay_file(replay_log);
      if (!replay_frames.empty()) {
        std::ofstream out(replay_frames, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write '" + replay_frames + "'");
        for (const auto& f : result.frames) out << f << '\n';
      }
      char digest[17];
      std::snprintf(digest, sizeof digest, "%016llx", static_cast<unsigned long long>(result.digest));
      nlohmann::json j = {{"commands", result.commands},
                          {"frames", result.frames.size()},
                          {"errors", result.errors},
                          {"final_version", result.final_version},
                          {"digest", digest}};
      std::cout << j.dump(2) << '\n';
    }
  } catch (const AssignmentError& e) {
    std::cerr << "error: " << e.what() << '\n';
    for (const auto& v : e.violations()) std::cerr << "  " << v.message << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
