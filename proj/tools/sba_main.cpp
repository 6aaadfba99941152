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

// The operator/client binary: launch either server role, act as a client,
// inject faults for drills, and run scripted recovery drills.
//
// Exit codes: 0 ok, 2 auth, 3 validation, 4 network, 5 integrity,
// 6 not found, 7 drill infrastructure failure, 1 anything else.

#include <fcntl.h>
#include <sys/stat.h>
#include <unistd.h>

#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sba/api_client.hpp"
#include "sba/chaos.hpp"
#include "sba/digest.hpp"
#include "sba/drill.hpp"
#include "sba/errors.hpp"
#include "server_run.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kInfraExit = 7;

struct ClientProfile {
  std::string main_url;
  std::string client_id_hex;
  std::string auth_token;
};

fs::path profile_path(const std::string& flag_value) {
  if (!flag_value.empty()) return flag_value;
  if (const char* env = std::getenv("SBA_PROFILE")) return env;
  const char* home = std::getenv("HOME");
  return fs::path(home ? home : ".") / ".sba" / "profile.json";
}

ClientProfile load_profile(const fs::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw sba::Error(sba::ErrorCode::validation_failed,
                     "no profile at " + path.string() +
                         "; run `sba client register` first");
  }
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw sba::Error(sba::ErrorCode::validation_failed,
                     "profile " + path.string() + " unreadable: " + e.what());
  }
  ClientProfile profile;
  profile.main_url = j.value("main_url", "");
  profile.client_id_hex = j.value("client_id", "");
  profile.auth_token = j.value("auth_token", "");
  if (profile.main_url.empty() || profile.auth_token.empty()) {
    throw sba::Error(sba::ErrorCode::validation_failed,
                     "profile " + path.string() + " is incomplete");
  }
  return profile;
}

// The token is a secret: owner-only permissions.
void save_profile(const fs::path& path, const ClientProfile& profile) {
  std::error_code ec;
  fs::create_directories(path.parent_path(), ec);
  ::chmod(path.parent_path().c_str(), 0700);
  json j;
  j["main_url"] = profile.main_url;
  j["client_id"] = profile.client_id_hex;
  j["auth_token"] = profile.auth_token;
  const std::string text = j.dump(2) + "\n";
  int fd = ::open(path.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0600);
  if (fd < 0) {
    throw sba::Error(sba::ErrorCode::internal,
                     "cannot write profile " + path.string());
  }
  ssize_t written = ::write(fd, text.data(), text.size());
  ::close(fd);
  if (written != static_cast<ssize_t>(text.size())) {
    throw sba::Error(sba::ErrorCode::internal,
                     "short write to profile " + path.string());
  }
}

sba::ApiClient make_client(const ClientProfile& profile) {
  sba::ApiClient client(profile.main_url);
  client.set_token(profile.auth_token);
  return client;
}

sba::Bytes read_local_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw sba::Error(sba::ErrorCode::validation_failed,
                     "cannot read " + path.string());
  }
  return sba::Bytes((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());
}

// Output: either human lines or a single JSON object per command.
void emit(bool json_out, const json& machine, const std::string& human) {
  if (json_out) {
    std::cout << machine.dump(2) << "\n";
  } else {
    std::cout << human;
  }
}

json record_json(const sba::FileRecordView& record) {
  json j;
  j["file_id"] = record.file_id;
  j["length"] = record.length;
  j["digest"] = record.digest_hex;
  j["updated_at"] = record.updated_at;
  j["status"] = record.status;
  return j;
}

int cmd_register(bool json_out, const std::string& main_url,
                 const std::string& admin_secret,
                 const std::string& profile_flag) {
  sba::ApiClient admin(main_url);
  admin.set_admin_secret(admin_secret);
  auto [client_id, token] = admin.register_client();
  const fs::path path = profile_path(profile_flag);
  save_profile(path, {main_url, client_id, token});
  json j;
  j["client_id"] = client_id;
  j["profile"] = path.string();
  emit(json_out, j,
       "registered client " + client_id + "\nprofile written to " +
           path.string() + "\n");
  return 0;
}

int cmd_put(bool json_out, const std::string& profile_flag,
            const std::string& local_path, std::string file_id) {
  ClientProfile profile = load_profile(profile_path(profile_flag));
  if (file_id.empty()) file_id = fs::path(local_path).filename().string();
  sba::Bytes content = read_local_file(local_path);
  auto client = make_client(profile);
  sba::FileRecordView record = client.put(file_id, content);
  emit(json_out, record_json(record),
       "stored " + file_id + " (" + std::to_string(record.length) +
           " bytes, mirrored)\n");
  return 0;
}

int cmd_get(bool json_out, const std::string& profile_flag,
            const std::string& file_id, const std::string& out_path) {
  ClientProfile profile = load_profile(profile_path(profile_flag));
  auto client = make_client(profile);
  sba::Bytes content = client.get(file_id);

  // The output path either holds the complete verified file or nothing.
  const fs::path out(out_path);
  const fs::path temp =
      out.parent_path() /
      (out.filename().string() + ".tmp." + std::to_string(::getpid()));
  {
    std::ofstream of(temp, std::ios::binary | std::ios::trunc);
    if (!of) {
      throw sba::Error(sba::ErrorCode::internal,
                       "cannot write " + temp.string());
    }
    of.write(reinterpret_cast<const char*>(content.data()),
             static_cast<std::streamsize>(content.size()));
    if (!of) {
      of.close();
      std::error_code ec;
      fs::remove(temp, ec);
      throw sba::Error(sba::ErrorCode::internal,
                       "short write to " + temp.string());
    }
  }
  std::error_code ec;
  fs::rename(temp, out, ec);
  if (ec) {
    fs::remove(temp, ec);
    throw sba::Error(sba::ErrorCode::internal,
                     "cannot move output into place at " + out.string());
  }
  json j;
  j["file_id"] = file_id;
  j["out_path"] = out.string();
  j["length"] = content.size();
  j["digest"] = sba::compute_digest(content).hex();
  emit(json_out, j,
       "wrote " + out.string() + " (" + std::to_string(content.size()) +
           " bytes, digest verified)\n");
  return 0;
}

int cmd_rm(bool json_out, const std::string& profile_flag,
           const std::string& file_id) {
  ClientProfile profile = load_profile(profile_path(profile_flag));
  auto client = make_client(profile);
  client.remove(file_id);
  json j;
  j["deleted"] = true;
  j["file_id"] = file_id;
  emit(json_out, j, "deleted " + file_id + " (backup copy retained)\n");
  return 0;
}

int cmd_recover(bool json_out, const std::string& profile_flag,
                const std::string& file_id, bool all, bool force) {
  ClientProfile profile = load_profile(profile_path(profile_flag));
  auto client = make_client(profile);
  if (!all) {
    if (file_id.empty()) {
      throw sba::Error(sba::ErrorCode::validation_failed,
                       "pass a file id or --all");
    }
    sba::FileRecordView record = client.recover(file_id, force);
    emit(json_out, record_json(record), "recovered " + file_id + "\n");
    return 0;
  }

  // Automatic mode: verify, then recover everything not present.
  sba::VerifySummary summary = client.verify();
  json files = json::array();
  std::size_t attempted = 0, restored = 0, failed = 0;
  std::string human;
  std::optional<sba::Error> first_error;
  for (const auto& entry : summary.files) {
    if (entry.status == "present") continue;
    ++attempted;
    json f;
    f["file_id"] = entry.file_id;
    try {
      client.recover(entry.file_id, false);
      ++restored;
      f["outcome"] = "restored";
      human += "recovered " + entry.file_id + "\n";
    } catch (const sba::Error& e) {
      ++failed;
      f["outcome"] = "failed";
      f["code"] = std::string(to_string(e.code()));
      f["message"] = e.what();
      human += "failed to recover " + entry.file_id + ": " + e.what() + "\n";
      if (!first_error) first_error = e;
    }
    files.push_back(std::move(f));
  }
  json j;
  j["attempted"] = attempted;
  j["restored"] = restored;
  j["failed"] = failed;
  j["files"] = std::move(files);
  if (attempted == 0) human = "nothing to recover; all files present\n";
  emit(json_out, j, human);
  if (first_error) throw *first_error;
  return 0;
}

int cmd_verify(bool json_out, const std::string& profile_flag) {
  ClientProfile profile = load_profile(profile_path(profile_flag));
  auto client = make_client(profile);
  sba::VerifySummary summary = client.verify();
  json files = json::array();
  std::string human;
  for (const auto& entry : summary.files) {
    json f;
    f["file_id"] = entry.file_id;
    f["status"] = entry.status;
    files.push_back(std::move(f));
    human += entry.status + "\t" + entry.file_id + "\n";
  }
  json j;
  j["files"] = std::move(files);
  j["present"] = summary.present;
  j["missing"] = summary.missing;
  j["corrupt"] = summary.corrupt;
  human += std::to_string(summary.present) + " present, " +
           std::to_string(summary.missing) + " missing, " +
           std::to_string(summary.corrupt) + " corrupt\n";
  emit(json_out, j, human);
  return 0;
}

int cmd_chaos(bool json_out, sba::ChaosAction action,
              const std::string& data_dir, bool all,
              const std::string& file_id, const std::string& client_id,
              std::uint64_t byte_offset) {
  sba::ChaosTarget target;
  target.all = all;
  if (!file_id.empty()) target.file_id = file_id;
  if (!client_id.empty()) target.client_id_hex = client_id;
  sba::ChaosReport report =
      sba::run_chaos(data_dir, action, target, byte_offset);
  json effects = json::array();
  std::string human;
  for (const auto& effect : report.effects) {
    json e;
    e["client_id"] = effect.client_id_hex;
    e["file_id"] = effect.file_id;
    e["what"] = effect.what;
    effects.push_back(std::move(e));
    human += effect.what + ": " + effect.file_id + " (client " +
             effect.client_id_hex + ")\n";
  }
  json j;
  j["effects"] = std::move(effects);
  emit(json_out, j, human);
  return 0;
}

int cmd_drill(bool json_out, const std::string& scenario_arg,
              const std::string& work_dir, bool keep, bool subprocess,
              const std::string& bin_override) {
  sba::DrillScenario scenario = sba::DrillScenario::load(scenario_arg);
  if (subprocess) scenario.mode = sba::DrillMode::subprocess;
  sba::DrillOptions options;
  if (!work_dir.empty()) options.work_dir = work_dir;
  options.keep_dirs = keep;
  options.self_binary =
      bin_override.empty() ? "/proc/self/exe" : bin_override;
  sba::RecoveryReport report = sba::run_drill(scenario, options);

  if (json_out) {
    std::cout << report.to_json() << "\n";
  } else {
    std::cout << "drill " << report.scenario << ": "
              << (report.passed ? "PASS" : "FAIL") << "\n"
              << "  files verified: " << report.files_verified << "\n"
              << "  recoveries: " << report.recoveries_performed
              << " (identical " << report.restored_identical << ", mismatch "
              << report.restored_mismatch << ", unrecoverable "
              << report.unrecoverable << ")\n"
              << "  bytes uploaded/restored: " << report.bytes_uploaded << "/"
              << report.bytes_restored << "\n"
              << "  duration: " << report.duration_seconds << "s\n";
    for (const auto& point : report.crash_points) {
      std::cout << "  crash point " << point.point << ": "
                << point.final_state
                << (point.fsck_clean ? " (fsck clean)" : " (fsck dirty)")
                << "\n";
    }
    if (!report.passed) {
      std::cout << "  reason: " << report.failure_reason << "\n";
    }
  }
  return report.passed ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "sba — seed-block XOR backup: main/remote servers, client tools, "
      "chaos injection and recovery drills"};
  app.set_version_flag("--version", "sba 1.0.0");
  app.require_subcommand(1);
  bool json_out = false;
  app.add_flag("--json", json_out, "machine-readable JSON output");


  // server
  auto* server = app.add_subcommand("server", "run a storage service");
  server->require_subcommand(1);
  std::string main_config_path;
  auto* server_main =
      server->add_subcommand("main", "run the main storage service");
  server_main->add_option("--config", main_config_path, "config JSON path")
      ->required();
  std::string remote_config_path;
  auto* server_remote =
      server->add_subcommand("remote", "run the remote backup service");
  server_remote->add_option("--config", remote_config_path, "config JSON path")
      ->required();

  // client
  auto* client = app.add_subcommand("client", "talk to the main service");
  client->require_subcommand(1);
  std::string profile_flag;
  client->add_option("--profile,-p", profile_flag,
                     "profile path (default $SBA_PROFILE or ~/.sba/profile.json)");

  std::string reg_url, reg_admin_secret;
  auto* creg = client->add_subcommand("register", "register a new client");
  creg->add_option("--main-url", reg_url, "main service URL")->required();
  creg->add_option("--admin-secret", reg_admin_secret, "admin secret")
      ->required();

  std::string put_local, put_id;
  auto* cput = client->add_subcommand("put", "upload a file");
  cput->add_option("local_path", put_local, "local file to upload")
      ->required();
  cput->add_option("file_id", put_id, "file id (default: basename)");

  std::string get_id, get_out;
  auto* cget = client->add_subcommand("get", "download a file");
  cget->add_option("file_id", get_id)->required();
  cget->add_option("out_path", get_out)->required();

  std::string rm_id;
  auto* crm = client->add_subcommand("rm", "delete the primary copy");
  crm->add_option("file_id", rm_id)->required();

  std::string rec_id;
  bool rec_all = false, rec_force = false;
  auto* crec = client->add_subcommand(
      "recover", "restore files from the remote backup");
  crec->add_option("file_id", rec_id);
  crec->add_flag("--all", rec_all, "recover every missing/corrupt file");
  crec->add_flag("--force", rec_force, "re-fetch even if present");

  auto* cver = client->add_subcommand("verify", "check files against disk");

  // chaos
  auto* chaos = app.add_subcommand(
      "chaos", "inject faults into a data_dir (test use only)");
  chaos->require_subcommand(1);
  std::string chaos_dir, chaos_fid, chaos_cid;
  bool chaos_all = false;
  std::uint64_t chaos_offset = 0;
  auto add_chaos_opts = [&](CLI::App* cmd) {
    cmd->add_option("--data-dir", chaos_dir, "store directory")->required();
    cmd->add_option("--file-id", chaos_fid, "target file id");
    cmd->add_option("--client-id", chaos_cid, "narrow to one client (hex)");
    cmd->add_flag("--all", chaos_all, "target every file");
  };
  auto* chaos_delete =
      chaos->add_subcommand("delete", "remove blob file(s)");
  add_chaos_opts(chaos_delete);
  auto* chaos_corrupt =
      chaos->add_subcommand("corrupt", "flip one byte of blob file(s)");
  add_chaos_opts(chaos_corrupt);
  chaos_corrupt->add_option("--byte-offset", chaos_offset,
                            "offset of the byte to flip (default 0)");

  // drill
  auto* drill = app.add_subcommand("drill", "scripted recovery drills");
  drill->require_subcommand(1);
  std::string drill_scenario, drill_work_dir, drill_bin;
  bool drill_keep = false, drill_process = false;
  auto* drill_run = drill->add_subcommand("run", "run one drill scenario");
  drill_run
      ->add_option("--scenario", drill_scenario,
                   "builtin name (wipe_main, delete_one, corrupt_one, "
                   "kill_during_put) or scenario JSON path")
      ->required();
  drill_run->add_option("--work-dir", drill_work_dir,
                        "scratch directory (default: temp)");
  drill_run->add_flag("--keep", drill_keep, "keep scratch directories");
  drill_run->add_flag("--process", drill_process,
                      "run services as real child processes");
  drill_run->add_option("--bin", drill_bin,
                        "server binary for --process (default: self)");

  // Global flags like --json may appear after any subcommand.
  std::function<void(CLI::App*)> enable_fallthrough = [&](CLI::App* cmd) {
    for (CLI::App* sub : cmd->get_subcommands([](CLI::App*) { return true; })) {
      sub->fallthrough();
      enable_fallthrough(sub);
    }
  };
  enable_fallthrough(&app);

  CLI11_PARSE(app, argc, argv);

  try {
    if (server_main->parsed()) return sba_cli::run_main_server(main_config_path);
    if (server_remote->parsed()) {
      return sba_cli::run_remote_server(remote_config_path);
    }
    if (creg->parsed()) {
      return cmd_register(json_out, reg_url, reg_admin_secret, profile_flag);
    }
    if (cput->parsed()) return cmd_put(json_out, profile_flag, put_local, put_id);
    if (cget->parsed()) return cmd_get(json_out, profile_flag, get_id, get_out);
    if (crm->parsed()) return cmd_rm(json_out, profile_flag, rm_id);
    if (crec->parsed()) {
      return cmd_recover(json_out, profile_flag, rec_id, rec_all, rec_force);
    }
    if (cver->parsed()) return cmd_verify(json_out, profile_flag);
    if (chaos_delete->parsed()) {
      return cmd_chaos(json_out, sba::ChaosAction::remove, chaos_dir,
                       chaos_all, chaos_fid, chaos_cid, 0);
    }
    if (chaos_corrupt->parsed()) {
      return cmd_chaos(json_out, sba::ChaosAction::corrupt, chaos_dir,
                       chaos_all, chaos_fid, chaos_cid, chaos_offset);
    }
    if (drill_run->parsed()) {
      return cmd_drill(json_out, drill_scenario, drill_work_dir, drill_keep,
                       drill_process, drill_bin);
    }
  } catch (const sba::DrillInfraError& e) {
    std::cerr << "infrastructure failure: " << e.what() << "\n";
    return kInfraExit;
  } catch (const sba::Error& e) {
    if (json_out) {
      json j;
      j["error"]["code"] = std::string(to_string(e.code()));
      j["error"]["message"] = e.what();
      std::cout << j.dump(2) << "\n";
    } else {
      std::cerr << "error (" << to_string(e.code()) << "): " << e.what()
                << "\n";
    }
    return sba::exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
