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

// Server-only entry point: `sba-server main|remote --config <path>`.
// Same runtime as `sba server main|remote --config <path>`.

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "sba/errors.hpp"
#include "server_run.hpp"

int main(int argc, char** argv) {
  CLI::App app{"sba-server — run the main or remote backup service"};
  app.set_version_flag("--version", "sba-server 1.0.0");
  app.require_subcommand(1);

  std::string main_config, remote_config;
  auto* main_cmd = app.add_subcommand("main", "run the main storage service");
  main_cmd->add_option("--config", main_config, "config JSON path")
      ->required();
  auto* remote_cmd =
      app.add_subcommand("remote", "run the remote backup service");
  remote_cmd->add_option("--config", remote_config, "config JSON path")
      ->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (main_cmd->parsed()) return sba_cli::run_main_server(main_config);
    if (remote_cmd->parsed()) return sba_cli::run_remote_server(remote_config);
  } catch (const sba::Error& e) {
    std::cerr << "error (" << to_string(e.code()) << "): " << e.what() << "\n";
    return sba::exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
