// Command-line front end: synthetic libraries, batch experiments, trace
// replay and the live teleoperation service.

#include <csignal>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "teleop/io.hpp"
#include "teleop/scenario.hpp"
#include "teleop/server.hpp"

namespace fs = std::filesystem;
using namespace teleop;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitCaseFailures = 2;

fs::path with_suffix(const fs::path& prefix, const char* ext) {
  fs::path p = prefix;
  p += ext;
  return p;
}

int gen_library(const std::string& object_id, const std::vector<double>& center, double radius,
                int count, std::uint64_t seed, const fs::path& out) {
  Pose object;
  object.position = Vec3(center[0], center[1], center[2]);
  const GraspLibrary lib = generate_synthetic_library(object_id, object, radius, count, seed);
  io::write_json_file(out, io::grasp_library_to_json(lib));
  std::cout << "wrote " << lib.candidates.size() << " grasps for '" << object_id << "' to " << out << "\n";
  return kExitOk;
}

int run(const fs::path& config_path, std::optional<std::uint64_t> seed, std::optional<fs::path> out) {
  ScenarioConfig config = load_scenario_config(config_path);
  if (seed) {
    if (!config.random_preparation) {
      throw InvalidInput("--seed given but the config has no random_preparation block");
    }
    config.random_preparation->seed = *seed;
  }
  if (out) config.output_path = *out;
  if (config.output_path.empty()) throw InvalidInput("no output path: set 'output' or pass --out");

  const ExperimentReport report = run_experiment(config);
  io::write_json_file(with_suffix(config.output_path, ".json"), report_to_json(report));
  io::write_text_file(with_suffix(config.output_path, ".csv"), report_to_csv(report));

  for (const auto& [strategy, a] : report.aggregate) {
    std::cout << to_string(strategy) << ": cases " << a.cases << ", failures " << a.failures
              << ", mean path " << a.mean_path_length << " m, mean rotation "
              << a.mean_orientation_travel << " rad, win rate " << a.win_rate << "\n";
  }
  return report.failures() > 0 ? kExitCaseFailures : kExitOk;
}

int replay(const fs::path& trace_path, const fs::path& config_path, std::optional<fs::path> out) {
  ScenarioConfig config = load_scenario_config(config_path);
  if (out) config.output_path = *out;
  if (config.output_path.empty()) throw InvalidInput("no output path: set 'output' or pass --out");

  const ReplayResult result = replay_trace(io::load_trace(trace_path), config);
  io::write_text_file(with_suffix(config.output_path, ".log.csv"), command_log_to_csv(result.log));
  io::write_json_file(with_suffix(config.output_path, ".json"), report_to_json(result.report));
  std::cout << "replayed " << result.log.size() << " samples, " << result.report.cases.size()
            << " grasp(s)\n";
  return result.report.failures() > 0 ? kExitCaseFailures : kExitOk;
}

TeleopServer* g_server = nullptr;

void on_signal(int) {
  if (g_server) g_server->stop();
}

int serve(const std::string& address, unsigned short port, const fs::path& model_path,
          const std::vector<std::string>& libraries, std::optional<fs::path> config_path) {
  SessionContext ctx;
  ctx.model = std::make_shared<const RobotModel>(io::load_robot_model(model_path));
  for (const auto& l : libraries) ctx.libraries.push_back(io::load_grasp_library(l));
  if (config_path) ctx.config = service_config_from_json(io::read_json_file(*config_path));

  TeleopServer server(std::move(ctx), {address, port});
  g_server = &server;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  std::cout << "serving on " << address << ":" << server.port() << " (/session, /health)" << std::endl;
  server.run();
  g_server = nullptr;
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Alternating shared-control teleoperation simulator"};
  app.require_subcommand(1);

  auto* gen = app.add_subcommand("gen-library", "Generate a synthetic grasp library");
  std::string object_id;
  std::vector<double> center;
  double radius = 0.1;
  int count = 150;
  std::uint64_t gen_seed = 1;
  fs::path gen_out;
  gen->add_option("--object-id", object_id, "Object identifier")->required();
  gen->add_option("--center", center, "Object center x y z (m)")->expected(3)->required();
  gen->add_option("--radius", radius, "Grasp standoff radius (m)");
  gen->add_option("--count", count, "Number of candidates");
  gen->add_option("--seed", gen_seed, "Random seed");
  gen->add_option("--out", gen_out, "Output JSON file")->required();

  auto* run_cmd = app.add_subcommand("run", "Run the strategy comparison experiment");
  fs::path run_config;
  std::optional<std::uint64_t> run_seed;
  std::optional<fs::path> run_out;
  run_cmd->add_option("config", run_config, "Scenario JSON")->required()->check(CLI::ExistingFile);
  run_cmd->add_option("--seed", run_seed, "Override the preparation-pose seed");
  run_cmd->add_option("--out", run_out, "Output prefix (writes .json and .csv)");

  auto* replay_cmd = app.add_subcommand("replay", "Replay a hand trace through the controller");
  fs::path trace_path, replay_config;
  std::optional<fs::path> replay_out;
  replay_cmd->add_option("trace", trace_path, "JSON-lines trace")->required()->check(CLI::ExistingFile);
  replay_cmd->add_option("--config", replay_config, "Scenario JSON (model, libraries, settings)")
      ->required()
      ->check(CLI::ExistingFile);
  replay_cmd->add_option("--out", replay_out, "Output prefix (writes .log.csv and .json)");

  auto* serve_cmd = app.add_subcommand("serve", "Start the live teleoperation service");
  std::string address = "127.0.0.1";
  unsigned short port = 8080;
  fs::path model_path;
  std::vector<std::string> libraries;
  std::optional<fs::path> serve_config;
  serve_cmd->add_option("--address", address, "Bind address");
  serve_cmd->add_option("--port", port, "TCP port");
  serve_cmd->add_option("--model", model_path, "Robot model JSON")->required()->check(CLI::ExistingFile);
  serve_cmd->add_option("--library", libraries, "Grasp library JSON (repeatable)")->check(CLI::ExistingFile);
  serve_cmd->add_option("--config", serve_config, "Service config JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (*gen) return gen_library(object_id, center, radius, count, gen_seed, gen_out);
    if (*run_cmd) return run(run_config, run_seed, run_out);
    if (*replay_cmd) return replay(trace_path, replay_config, replay_out);
    if (*serve_cmd) return serve(address, port, model_path, libraries, serve_config);
  } catch (const teleop::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  return kExitOk;
}
