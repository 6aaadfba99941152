// Copyright 2026 The SBA Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "sba/drill.hpp"

#include <netinet/in.h>
#include <signal.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <map>
#include <mutex>
#include <random>
#include <thread>

#include <json.hpp>

#include "sba/api_client.hpp"
#include "sba/blob.hpp"
#include "sba/chaos.hpp"
#include "sba/digest.hpp"
#include "sba/fault.hpp"
#include "sba/main_service.hpp"
#include "sba/remote_client.hpp"
#include "sba/remote_service.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace sba {

std::string_view to_string(DrillFault fault) {
  switch (fault) {
    case DrillFault::delete_one: return "delete_one";
    case DrillFault::corrupt_one: return "corrupt_one";
    case DrillFault::wipe_main: return "wipe_main";
    case DrillFault::kill_during_put: return "kill_during_put";
  }
  return "delete_one";
}

std::string_view to_string(DrillMode mode) {
  return mode == DrillMode::in_process ? "in_process" : "subprocess";
}

std::string_view to_string(FileVerdict verdict) {
  switch (verdict) {
    case FileVerdict::restored_identical: return "restored_identical";
    case FileVerdict::restored_mismatch: return "restored_mismatch";
    case FileVerdict::unrecoverable: return "unrecoverable";
  }
  return "unrecoverable";
}

namespace {

std::optional<DrillFault> fault_from_string(std::string_view s) {
  if (s == "delete_one") return DrillFault::delete_one;
  if (s == "corrupt_one") return DrillFault::corrupt_one;
  if (s == "wipe_main") return DrillFault::wipe_main;
  if (s == "kill_during_put") return DrillFault::kill_during_put;
  return std::nullopt;
}

}  // namespace

DrillScenario DrillScenario::from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::validation_failed,
                std::string("scenario is not valid JSON: ") + e.what());
  }
  DrillScenario s;
  s.name = j.value("name", "custom");
  s.num_clients = j.value("num_clients", 1);
  s.files_per_client = j.value("files_per_client", 1);
  if (j.contains("file_size_range")) {
    const auto& range = j["file_size_range"];
    if (!range.is_array() || range.size() != 2) {
      throw Error(ErrorCode::validation_failed,
                  "file_size_range must be [min, max]");
    }
    s.min_size = range[0].get<std::uint64_t>();
    s.max_size = range[1].get<std::uint64_t>();
  }
  auto fault = fault_from_string(j.value("fault", ""));
  if (!fault) {
    throw Error(ErrorCode::validation_failed,
                "fault must be delete_one, corrupt_one, wipe_main or "
                "kill_during_put");
  }
  s.fault = *fault;
  s.seed_for_rng = j.value("seed_for_rng", std::uint64_t{1});
  const std::string mode = j.value("mode", "in_process");
  if (mode == "subprocess") {
    s.mode = DrillMode::subprocess;
  } else if (mode != "in_process") {
    throw Error(ErrorCode::validation_failed,
                "mode must be in_process or subprocess");
  }
  if (s.num_clients < 1 || s.files_per_client < 1 ||
      s.min_size > s.max_size) {
    throw Error(ErrorCode::validation_failed,
                "scenario sizes/counts are inconsistent");
  }
  return s;
}

std::string DrillScenario::to_json() const {
  json j;
  j["name"] = name;
  j["num_clients"] = num_clients;
  j["files_per_client"] = files_per_client;
  j["file_size_range"] = {min_size, max_size};
  j["fault"] = std::string(to_string(fault));
  j["seed_for_rng"] = seed_for_rng;
  j["mode"] = std::string(to_string(mode));
  return j.dump(2);
}

std::optional<DrillScenario> DrillScenario::builtin(std::string_view name) {
  DrillScenario s;
  s.name = std::string(name);
  if (name == "wipe_main") {
    s.num_clients = 3;
    s.files_per_client = 5;
    s.min_size = 0;
    s.max_size = 64 * 1024;
    s.fault = DrillFault::wipe_main;
    s.seed_for_rng = 42;
    return s;
  }
  if (name == "delete_one") {
    s.num_clients = 2;
    s.files_per_client = 3;
    s.min_size = 0;
    s.max_size = 4096;
    s.fault = DrillFault::delete_one;
    s.seed_for_rng = 7;
    return s;
  }
  if (name == "corrupt_one") {
    s.num_clients = 2;
    s.files_per_client = 3;
    s.min_size = 1;
    s.max_size = 4096;
    s.fault = DrillFault::corrupt_one;
    s.seed_for_rng = 11;
    return s;
  }
  if (name == "kill_during_put") {
    s.num_clients = 1;
    s.files_per_client = 3;
    s.min_size = 16;
    s.max_size = 4096;
    s.fault = DrillFault::kill_during_put;
    s.seed_for_rng = 13;
    return s;
  }
  return std::nullopt;
}

DrillScenario DrillScenario::load(const std::string& name_or_path) {
  if (auto s = builtin(name_or_path)) return *s;
  std::ifstream in(name_or_path);
  if (!in) {
    throw Error(ErrorCode::not_found,
                "no builtin scenario or readable file named " + name_or_path);
  }
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return from_json(text);
}

std::string RecoveryReport::to_json() const {
  json j;
  j["scenario"] = scenario;
  j["passed"] = passed;
  if (!failure_reason.empty()) j["failure_reason"] = failure_reason;
  j["duration_seconds"] = duration_seconds;
  j["bytes_uploaded"] = bytes_uploaded;
  j["bytes_restored"] = bytes_restored;
  j["faults_injected"] = faults_injected;
  j["recoveries_performed"] = recoveries_performed;
  j["files_verified"] = files_verified;
  json verdicts;
  verdicts["restored_identical"] = restored_identical;
  verdicts["restored_mismatch"] = restored_mismatch;
  verdicts["unrecoverable"] = unrecoverable;
  j["verdict_counts"] = std::move(verdicts);
  json files_json = json::array();
  for (const auto& f : files) {
    json item;
    item["client_id"] = f.client_id_hex;
    item["file_id"] = f.file_id;
    item["length"] = f.length;
    item["verdict"] = std::string(to_string(f.verdict));
    files_json.push_back(std::move(item));
  }
  j["files"] = std::move(files_json);
  if (!crash_points.empty()) {
    json points = json::array();
    for (const auto& p : crash_points) {
      json item;
      item["point"] = p.point;
      item["final_state"] = p.final_state;
      item["fsck_clean"] = p.fsck_clean;
      points.push_back(std::move(item));
    }
    j["crash_points"] = std::move(points);
  }
  return j.dump(2);
}

std::vector<WorkloadFile> generate_workload(const DrillScenario& scenario) {
  // Reproducibility contract: identical seed => identical ids and bytes.
  // Sizes and content come straight from the engine (no distribution
  // adapters, whose outputs differ between standard libraries).
  std::mt19937_64 rng(scenario.seed_for_rng);
  const std::uint64_t ladder[] = {0, 1, 15, 16, 17, 4096, 65536};
  std::vector<std::uint64_t> sizes;
  for (std::uint64_t size : ladder) {
    if (size >= scenario.min_size && size <= scenario.max_size) {
      sizes.push_back(size);
    }
  }

  const int total = scenario.num_clients * scenario.files_per_client;
  std::vector<WorkloadFile> out;
  out.reserve(total);
  const std::uint64_t span = scenario.max_size - scenario.min_size + 1;
  for (int k = 0; k < total; ++k) {
    WorkloadFile file;
    file.client_index = k / scenario.files_per_client;
    file.file_id = (k % 4 == 2)
                       ? "file " + std::to_string(k) + " copy.dat"
                       : "f" + std::to_string(k) + ".bin";
    const std::uint64_t size = (static_cast<std::size_t>(k) < sizes.size())
                                   ? sizes[k]
                                   : scenario.min_size + rng() % span;
    file.content.resize(size);
    std::size_t i = 0;
    while (i < size) {
      std::uint64_t word = rng();
      for (int b = 0; b < 8 && i < size; ++b, ++i) {
        file.content[i] = static_cast<std::uint8_t>(word >> (8 * b));
      }
    }
    out.push_back(std::move(file));
  }
  return out;
}

namespace {

using Clock = std::chrono::steady_clock;

int pick_free_port() {
  int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd < 0) throw DrillInfraError("cannot create probe socket");
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  addr.sin_port = 0;
  socklen_t len = sizeof(addr);
  int port = -1;
  if (::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) == 0 &&
      ::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len) == 0) {
    port = ntohs(addr.sin_port);
  }
  ::close(fd);
  if (port <= 0) throw DrillInfraError("cannot find a free port");
  return port;
}

fs::path make_work_dir(const DrillOptions& options) {
  if (!options.work_dir.empty()) {
    std::error_code ec;
    fs::create_directories(options.work_dir, ec);
    if (ec) {
      throw DrillInfraError("cannot create work dir " +
                            options.work_dir.string());
    }
    return options.work_dir;
  }
  const char* tmpdir = std::getenv("TMPDIR");
  std::string pattern = std::string(tmpdir ? tmpdir : "/tmp") +
                        "/sba-drill-XXXXXX";
  std::vector<char> buf(pattern.begin(), pattern.end());
  buf.push_back('\0');
  if (::mkdtemp(buf.data()) == nullptr) {
    throw DrillInfraError("mkdtemp failed under " + pattern);
  }
  return fs::path(buf.data());
}

std::string self_binary_path(const DrillOptions& options) {
  if (!options.self_binary.empty()) return options.self_binary;
  if (const char* env = std::getenv("SBA_BIN")) return env;
  return "/proc/self/exe";
}

/// One running service, in-process or as a child process.
class ServiceHandle {
 public:
  virtual ~ServiceHandle() = default;
  virtual std::string url() const = 0;
  virtual void stop() = 0;
  virtual void restart() = 0;
};

class InProcessRemote : public ServiceHandle {
 public:
  explicit InProcessRemote(RemoteConfig config) : config_(std::move(config)) {
    restart();
  }
  std::string url() const override {
    return "http://127.0.0.1:" + std::to_string(port_);
  }
  void stop() override { service_.reset(); }
  void restart() override {
    service_ = std::make_unique<RemoteService>(config_);
    port_ = service_->listen_background("127.0.0.1", port_ > 0 ? port_ : 0);
  }

 private:
  RemoteConfig config_;
  std::unique_ptr<RemoteService> service_;
  int port_ = 0;
};

class InProcessMain : public ServiceHandle {
 public:
  explicit InProcessMain(MainConfig config) : config_(std::move(config)) {
    restart();
  }
  std::string url() const override {
    return "http://127.0.0.1:" + std::to_string(port_);
  }
  void stop() override { service_.reset(); }
  void restart() override {
    service_ = std::make_unique<MainService>(config_);
    port_ = service_->listen_background("127.0.0.1", port_ > 0 ? port_ : 0);
  }
  const MainConfig& config() const { return config_; }

 private:
  MainConfig config_;
  std::unique_ptr<MainService> service_;
  int port_ = 0;
};

/// Child process running `sba server <role> --config <path>`.
class SubprocessService : public ServiceHandle {
 public:
  SubprocessService(std::string binary, std::string role,
                    fs::path config_path, int port,
                    std::vector<std::pair<std::string, std::string>> env = {})
      : binary_(std::move(binary)),
        role_(std::move(role)),
        config_path_(std::move(config_path)),
        port_(port),
        env_(std::move(env)) {
    spawn();
    wait_healthy();
  }

  ~SubprocessService() override { stop(); }

  std::string url() const override {
    return "http://127.0.0.1:" + std::to_string(port_);
  }

  void stop() override {
    if (pid_ <= 0) return;
    ::kill(pid_, SIGTERM);
    reap(true);
  }

  void restart() override {
    stop();
    env_.clear();  // crash arming applies to one incarnation only
    spawn();
    wait_healthy();
  }

  /// Waits for the child to exit on its own (crash injection).
  int wait_exit() { return reap(false); }

 private:
  void spawn() {
    pid_t pid = ::fork();
    if (pid < 0) throw DrillInfraError("fork failed");
    if (pid == 0) {
      for (const auto& [key, value] : env_) {
        ::setenv(key.c_str(), value.c_str(), 1);
      }
      std::string config_arg = config_path_.string();
      const char* argv[] = {"sba",          "server",
                            role_.c_str(),  "--config",
                            config_arg.c_str(), nullptr};
      ::execv(binary_.c_str(), const_cast<char**>(argv));
      ::_exit(127);
    }
    pid_ = pid;
  }

  int reap(bool expect_running) {
    if (pid_ <= 0) return -1;
    int status = 0;
    for (int i = 0; i < 500; ++i) {
      pid_t done = ::waitpid(pid_, &status, WNOHANG);
      if (done == pid_) {
        pid_ = -1;
        return status;
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(20));
      if (expect_running && i == 250) ::kill(pid_, SIGKILL);
    }
    ::kill(pid_, SIGKILL);
    ::waitpid(pid_, &status, 0);
    pid_ = -1;
    return status;
  }

  void wait_healthy() {
    ApiClient probe(url());
    for (int i = 0; i < 250; ++i) {
      if (probe.health()) return;
      int status = 0;
      if (::waitpid(pid_, &status, WNOHANG) == pid_) {
        pid_ = -1;
        throw DrillInfraError(role_ + " server exited during startup");
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(20));
    }
    throw DrillInfraError(role_ + " server never became healthy");
  }

  std::string binary_;
  std::string role_;
  fs::path config_path_;
  int port_ = 0;
  std::vector<std::pair<std::string, std::string>> env_;
  pid_t pid_ = -1;
};

struct GroundTruth {
  std::vector<WorkloadFile> files;
  std::vector<std::string> tokens;       // per client index
  std::vector<std::string> client_hex;   // per client index
};

constexpr char kAdminSecret[] = "drill-admin-secret";
constexpr char kSharedSecret[] = "drill-shared-secret";

/// Registers clients and uploads the workload with up to 32 workers.
void seed_workload(const std::string& main_url, const DrillScenario& scenario,
                   GroundTruth& truth, RecoveryReport& report) {
  ApiClient admin(main_url);
  admin.set_admin_secret(kAdminSecret);
  for (int c = 0; c < scenario.num_clients; ++c) {
    auto [cid_hex, token] = admin.register_client();
    truth.client_hex.push_back(cid_hex);
    truth.tokens.push_back(token);
  }

  truth.files = generate_workload(scenario);

  std::atomic<std::size_t> next{0};
  std::mutex error_mu;
  std::string first_error;
  const int workers =
      std::min<int>(32, static_cast<int>(truth.files.size()));
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      std::map<int, std::unique_ptr<ApiClient>> clients;
      while (true) {
        const std::size_t i = next.fetch_add(1);
        if (i >= truth.files.size()) return;
        {
          std::lock_guard lock(error_mu);
          if (!first_error.empty()) return;
        }
        const WorkloadFile& file = truth.files[i];
        try {
          auto& client = clients[file.client_index];
          if (!client) {
            client = std::make_unique<ApiClient>(main_url);
            client->set_token(truth.tokens[file.client_index]);
          }
          client->put(file.file_id, file.content);
        } catch (const std::exception& e) {
          std::lock_guard lock(error_mu);
          if (first_error.empty()) {
            first_error = "upload of " + file.file_id + " failed: " + e.what();
          }
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (!first_error.empty()) {
    throw Error(ErrorCode::internal, first_error);
  }
  for (const auto& file : truth.files) {
    report.bytes_uploaded += file.content.size();
  }
}

/// GETs every ground-truth file and byte-compares it.
std::size_t verify_all(const std::string& main_url, const GroundTruth& truth,
                       std::vector<std::string>* mismatches) {
  std::size_t matched = 0;
  std::map<int, std::unique_ptr<ApiClient>> clients;
  for (const auto& file : truth.files) {
    auto& client = clients[file.client_index];
    if (!client) {
      client = std::make_unique<ApiClient>(main_url);
      client->set_token(truth.tokens[file.client_index]);
    }
    try {
      Bytes got = client->get(file.file_id);
      if (got == file.content) {
        ++matched;
      } else if (mismatches) {
        mismatches->push_back(file.file_id + ": bytes differ");
      }
    } catch (const std::exception& e) {
      if (mismatches) {
        mismatches->push_back(file.file_id + ": " + e.what());
      }
    }
  }
  return matched;
}

const WorkloadFile* find_truth(const GroundTruth& truth,
                               const std::string& cid_hex,
                               const std::string& file_id) {
  for (std::size_t c = 0; c < truth.client_hex.size(); ++c) {
    if (truth.client_hex[c] != cid_hex) continue;
    for (const auto& file : truth.files) {
      if (file.client_index == static_cast<int>(c) &&
          file.file_id == file_id) {
        return &file;
      }
    }
  }
  return nullptr;
}

/// Applies the admin recover-all sweep and grades each recovered file
/// against ground truth.
void recover_and_grade(const std::string& main_url, const GroundTruth& truth,
                       RecoveryReport& report) {
  ApiClient admin(main_url);
  admin.set_admin_secret(kAdminSecret);
  RecoverAllSummary summary = admin.recover_all(std::nullopt);
  report.recoveries_performed = summary.attempted;

  std::map<int, std::unique_ptr<ApiClient>> clients;
  for (const auto& outcome : summary.files) {
    DrillFileResult result;
    result.client_id_hex = outcome.client_id_hex;
    result.file_id = outcome.file_id;
    const WorkloadFile* expected =
        find_truth(truth, outcome.client_id_hex, outcome.file_id);
    if (expected) result.length = expected->content.size();

    if (outcome.status != "restored") {
      result.verdict = FileVerdict::unrecoverable;
    } else if (expected == nullptr) {
      result.verdict = FileVerdict::restored_mismatch;  // unknown file
    } else {
      int client_index = -1;
      for (std::size_t c = 0; c < truth.client_hex.size(); ++c) {
        if (truth.client_hex[c] == outcome.client_id_hex) {
          client_index = static_cast<int>(c);
        }
      }
      auto& client = clients[client_index];
      if (!client) {
        client = std::make_unique<ApiClient>(main_url);
        client->set_token(truth.tokens[client_index]);
      }
      try {
        Bytes got = client->get(outcome.file_id);
        result.verdict = got == expected->content
                             ? FileVerdict::restored_identical
                             : FileVerdict::restored_mismatch;
      } catch (const std::exception&) {
        result.verdict = FileVerdict::restored_mismatch;
      }
    }

    switch (result.verdict) {
      case FileVerdict::restored_identical:
        ++report.restored_identical;
        report.bytes_restored += result.length;
        break;
      case FileVerdict::restored_mismatch: ++report.restored_mismatch; break;
      case FileVerdict::unrecoverable: ++report.unrecoverable; break;
    }
    report.files.push_back(std::move(result));
  }
}

struct FaultPlan {
  ChaosAction action = ChaosAction::remove;
  ChaosTarget target;
  std::uint64_t byte_offset = 0;
};

FaultPlan plan_fault(const DrillScenario& scenario,
                     const GroundTruth& truth) {
  // A second stream, decoupled from workload generation, so the victim
  // choice never perturbs file contents.
  std::mt19937_64 rng(scenario.seed_for_rng ^ 0x9e3779b97f4a7c15ULL);
  FaultPlan plan;
  if (scenario.fault == DrillFault::wipe_main) {
    plan.target.all = true;
    return plan;
  }
  const std::size_t total = truth.files.size();
  std::size_t victim = rng() % total;
  if (scenario.fault == DrillFault::corrupt_one) {
    for (std::size_t step = 0; step < total; ++step) {
      const auto& candidate = truth.files[(victim + step) % total];
      if (!candidate.content.empty()) {
        victim = (victim + step) % total;
        break;
      }
    }
    plan.action = ChaosAction::corrupt;
    plan.byte_offset = rng() % truth.files[victim].content.size();
  }
  const WorkloadFile& file = truth.files[victim];
  plan.target.file_id = file.file_id;
  plan.target.client_id_hex = truth.client_hex[file.client_index];
  return plan;
}

void grade_drill(RecoveryReport& report, const GroundTruth& truth,
                 const std::string& main_url) {
  std::vector<std::string> mismatches;
  report.files_verified = verify_all(main_url, truth, &mismatches);
  const bool all_verified = report.files_verified == truth.files.size();
  report.passed = report.restored_mismatch == 0 && report.unrecoverable == 0 &&
                  all_verified;
  if (!report.passed && report.failure_reason.empty()) {
    if (!mismatches.empty()) {
      report.failure_reason = mismatches.front();
    } else if (report.restored_mismatch > 0) {
      report.failure_reason = "a recovered file differs from its original";
    } else if (report.unrecoverable > 0) {
      report.failure_reason = "a file could not be recovered";
    }
  }
}

/// Crash sweep for kill_during_put, in-process flavor: drives put_file
/// directly with the injector armed, then reopens the store and checks it.
void run_crash_sweep_in_process(const MainConfig& main_config,
                                const GroundTruth& truth,
                                const DrillScenario& scenario,
                                RecoveryReport& report) {
  std::mt19937_64 rng(scenario.seed_for_rng ^ 0xc2b2ae3d27d4eb4fULL);
  auto cid = ClientId::from_hex(truth.client_hex[0]);
  if (!cid) throw DrillInfraError("bad client id in ground truth");

  for (std::string_view point : kPutCrashPoints) {
    ++report.faults_injected;
    std::string file_id = "crash-victim-" + std::to_string(rng() % 100000);
    Bytes content(512 + rng() % 1024);
    for (auto& b : content) b = static_cast<std::uint8_t>(rng());

    bool crashed = false;
    {
      MainService service(main_config);
      FaultInjector::instance().arm(std::string(point),
                                    FaultInjector::Mode::throw_exception);
      try {
        service.put_file(*cid, file_id, content);
      } catch (const CrashPointHit&) {
        crashed = true;
      }
      FaultInjector::instance().disarm();
      // The service object is discarded without any shutdown work, like a
      // process that died at the injection point.
    }

    CrashPointResult result;
    result.point = std::string(point);
    auto store = Store::open(main_config.data_dir, StoreRole::main);
    FsckReport fsck = store->fsck();
    result.fsck_clean = fsck.corrupt == 0 && fsck.missing == 0;

    auto record = store->find_file(*cid, file_id);
    if (!record) {
      result.final_state = "absent";
    } else if (record->status == FileStatus::present) {
      // Committed is only honest if both halves are intact and agree.
      try {
        auto [bytes, rec] = store->get_object(*cid, file_id);
        RemoteClient remote(main_config.remote_url,
                            main_config.remote_shared_secret);
        BackupBlob blob = parse_blob(remote.get_blob(*cid, file_id));
        auto client = store->find_client(*cid);
        const SeedBlock seed = derive_seed(*client->nonce, *cid);
        const Bytes decoded = recover_bytes(blob.payload, seed);
        result.final_state =
            (bytes == content && decoded == content) ? "committed" : "torn";
      } catch (const std::exception&) {
        result.final_state = "torn";
      }
    } else {
      result.final_state = "torn";
    }
    if (!crashed) {
      // The injection point was never crossed; that is a harness bug.
      result.final_state = "torn";
    }
    // Leave no residue for the next point: a committed put is fine to keep,
    // it just becomes part of the store.
    report.crash_points.push_back(result);
  }
}

void run_crash_sweep_subprocess(std::unique_ptr<SubprocessService>& slot,
                                const fs::path& main_config_path,
                                const std::string& binary, int main_port,
                                const GroundTruth& truth,
                                const DrillScenario& scenario,
                                RecoveryReport& report) {
  std::mt19937_64 rng(scenario.seed_for_rng ^ 0xc2b2ae3d27d4eb4fULL);
  slot->stop();
  slot.reset();

  for (std::string_view point : kPutCrashPoints) {
    ++report.faults_injected;
    std::string file_id = "crash-victim-" + std::to_string(rng() % 100000);
    Bytes content(512 + rng() % 1024);
    for (auto& b : content) b = static_cast<std::uint8_t>(rng());

    auto armed = std::make_unique<SubprocessService>(
        binary, "main", main_config_path, main_port,
        std::vector<std::pair<std::string, std::string>>{
            {"SBA_CRASH_POINT", std::string(point)},
            {"SBA_CRASH_MODE", "exit"}});
    ApiClient client(armed->url());
    client.set_token(truth.tokens[0]);
    bool crashed = false;
    try {
      client.put(file_id, content);
    } catch (const Error&) {
      crashed = true;  // connection died mid-request
    }
    armed->wait_exit();
    armed.reset();

    // Restart clean and inspect.
    auto healthy = std::make_unique<SubprocessService>(
        binary, "main", main_config_path, main_port);
    CrashPointResult result;
    result.point = std::string(point);
    ApiClient admin(healthy->url());
    admin.set_admin_secret(kAdminSecret);
    VerifySummary fsck = admin.verify();
    result.fsck_clean = fsck.corrupt == 0 && fsck.missing == 0;
    ApiClient reader(healthy->url());
    reader.set_token(truth.tokens[0]);
    try {
      Bytes got = reader.get(file_id);
      result.final_state = got == content ? "committed" : "torn";
    } catch (const Error& e) {
      result.final_state =
          e.code() == ErrorCode::not_found ? "absent" : "torn";
    }
    if (!crashed) result.final_state = "torn";
    report.crash_points.push_back(result);
    healthy->stop();
    healthy.reset();
  }

  slot = std::make_unique<SubprocessService>(binary, "main", main_config_path,
                                             main_port);
}

}  // namespace

RecoveryReport run_drill(const DrillScenario& scenario,
                         const DrillOptions& options) {
  const auto started = Clock::now();
  RecoveryReport report;
  report.scenario = scenario.name;

  const fs::path work = make_work_dir(options);
  const fs::path main_dir = work / "main-data";
  const fs::path remote_dir = work / "remote-data";

  RemoteConfig remote_config;
  remote_config.data_dir = remote_dir.string();
  remote_config.shared_secret = kSharedSecret;

  MainConfig main_config;
  main_config.data_dir = main_dir.string();
  main_config.remote_shared_secret = kSharedSecret;
  main_config.admin_secret = kAdminSecret;

  std::unique_ptr<ServiceHandle> remote;
  std::unique_ptr<ServiceHandle> main;
  std::unique_ptr<SubprocessService> main_proc_slot;

  try {
    std::string binary = self_binary_path(options);
    fs::path main_config_path = work / "main.json";
    fs::path remote_config_path = work / "remote.json";
    int main_port = 0;

    if (scenario.mode == DrillMode::in_process) {
      auto in_remote = std::make_unique<InProcessRemote>(remote_config);
      main_config.remote_url = in_remote->url();
      remote = std::move(in_remote);
      main = std::make_unique<InProcessMain>(main_config);
    } else {
      const int remote_port = pick_free_port();
      main_port = pick_free_port();
      remote_config.listen_address =
          "127.0.0.1:" + std::to_string(remote_port);
      main_config.listen_address = "127.0.0.1:" + std::to_string(main_port);
      main_config.remote_url = "http://127.0.0.1:" + std::to_string(remote_port);
      std::ofstream(remote_config_path) << remote_config.to_json();
      std::ofstream(main_config_path) << main_config.to_json();
      remote = std::make_unique<SubprocessService>(
          binary, "remote", remote_config_path, remote_port);
      auto proc = std::make_unique<SubprocessService>(
          binary, "main", main_config_path, main_port);
      main_proc_slot = std::move(proc);
    }

    const std::string main_url =
        main_proc_slot ? main_proc_slot->url() : main->url();

    GroundTruth truth;
    seed_workload(main_url, scenario, truth, report);

    if (scenario.fault == DrillFault::kill_during_put) {
      if (scenario.mode == DrillMode::in_process) {
        auto* in_main = static_cast<InProcessMain*>(main.get());
        in_main->stop();
        run_crash_sweep_in_process(main_config, truth, scenario, report);
        in_main->restart();
      } else {
        run_crash_sweep_subprocess(main_proc_slot, main_config_path, binary,
                                   main_port, truth, scenario, report);
      }
      const std::string url =
          main_proc_slot ? main_proc_slot->url() : main->url();
      std::vector<std::string> mismatches;
      report.files_verified = verify_all(url, truth, &mismatches);
      bool sweep_ok = true;
      for (const auto& p : report.crash_points) {
        if (p.final_state == "torn" || !p.fsck_clean) sweep_ok = false;
      }
      report.passed = sweep_ok && report.files_verified == truth.files.size();
      if (!report.passed && report.failure_reason.empty()) {
        report.failure_reason = !sweep_ok
                                    ? "a crash point left a torn store"
                                    : (mismatches.empty()
                                           ? "verification failed"
                                           : mismatches.front());
      }
    } else {
      FaultPlan plan = plan_fault(scenario, truth);
      ChaosReport chaos =
          run_chaos(main_dir, plan.action, plan.target, plan.byte_offset);
      report.faults_injected = chaos.effects.size();

      const std::string url =
          main_proc_slot ? main_proc_slot->url() : main->url();
      recover_and_grade(url, truth, report);
      grade_drill(report, truth, url);
    }
  } catch (const DrillInfraError&) {
    throw;
  } catch (const std::exception& e) {
    report.passed = false;
    report.failure_reason = e.what();
  }

  if (main) main->stop();
  if (main_proc_slot) main_proc_slot->stop();
  if (remote) remote->stop();

  report.duration_seconds =
      std::chrono::duration<double>(Clock::now() - started).count();
  if (!options.keep_dirs && options.work_dir.empty()) {
    std::error_code ec;
    fs::remove_all(work, ec);
  }
  return report;
}

}  // namespace sba
