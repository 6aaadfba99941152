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

#include <doctest.h>
#include <httplib.h>

#include <random>

#include "oracle.hpp"
#include "sba/api_client.hpp"
#include "sba/blob.hpp"
#include "sba/chaos.hpp"
#include "sba/digest.hpp"
#include "sba/main_service.hpp"
#include "sba/remote_service.hpp"
#include "test_util.hpp"

using namespace sba;
using namespace sba::test;

namespace {

struct Services {
  TempDir main_dir;
  TempDir remote_dir;
  std::string admin_secret = "test-admin-secret";
  std::string shared_secret = "test-shared-secret";
  std::unique_ptr<RemoteService> remote;
  std::unique_ptr<MainService> main;
  int remote_port = 0;
  int main_port = 0;

  explicit Services(const std::string& hook = "none",
                    const std::string& key_hex = "") {
    RemoteConfig rc;
    rc.data_dir = remote_dir.path.string();
    rc.shared_secret = shared_secret;
    remote = std::make_unique<RemoteService>(rc);
    remote_port = remote->listen_background();

    MainConfig mc;
    mc.data_dir = main_dir.path.string();
    mc.remote_url = remote_url();
    mc.remote_shared_secret = shared_secret;
    mc.admin_secret = admin_secret;
    mc.encryption_hook = hook;
    mc.aead_key_hex = key_hex;
    main = std::make_unique<MainService>(mc);
    main_port = main->listen_background();
  }

  std::string main_url() const {
    return "http://127.0.0.1:" + std::to_string(main_port);
  }
  std::string remote_url() const {
    return "http://127.0.0.1:" + std::to_string(remote_port);
  }

  ApiClient admin_client() const {
    ApiClient client(main_url());
    client.set_admin_secret(admin_secret);
    return client;
  }

  std::pair<ClientId, ApiClient> new_client() const {
    ApiClient admin = admin_client();
    auto [cid_hex, token] = admin.register_client();
    ApiClient client(main_url());
    client.set_token(token);
    return {*ClientId::from_hex(cid_hex), std::move(client)};
  }
};

}  // namespace

TEST_CASE("registrations create distinct clients with seeds at the remote") {
  Services services;
  ApiClient admin = services.admin_client();
  auto [cid1_hex, token1] = admin.register_client();
  auto [cid2_hex, token2] = admin.register_client();
  CHECK(cid1_hex != cid2_hex);
  CHECK(token1 != token2);

  // Recompute the seed independently from the two stored halves.
  for (const std::string& cid_hex : {cid1_hex, cid2_hex}) {
    auto cid = ClientId::from_hex(cid_hex);
    REQUIRE(cid.has_value());
    auto local = services.main->store().find_client(*cid);
    REQUIRE(local.has_value());
    REQUIRE(local->nonce.has_value());
    SeedBlock stored = services.remote->get_seed(*cid);
    CHECK(stored.array() ==
          xor16_oracle(local->nonce->array(), cid->array()));
  }
}

TEST_CASE("registration is all-or-nothing when the remote is down") {
  TempDir main_dir;
  MainConfig mc;
  mc.data_dir = main_dir.path.string();
  mc.remote_url = "http://127.0.0.1:1";  // nothing listens here
  mc.remote_shared_secret = "s";
  mc.admin_secret = "a";
  MainService main(mc);  // degraded start is allowed
  int port = main.listen_background();

  ApiClient admin("http://127.0.0.1:" + std::to_string(port));
  admin.set_admin_secret("a");
  try {
    admin.register_client();
    FAIL("expected remote_unreachable");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::remote_unreachable);
  }
  CHECK(main.store().clients().empty());
}

TEST_CASE("the remote holds the seed-encoded payload, not the plaintext") {
  Services services;
  auto [cid, client] = services.new_client();
  const std::string text = "hello";
  Bytes plaintext = to_bytes(text);
  client.put("greeting.txt", plaintext);

  Bytes blob_bytes = services.remote->get_blob(cid, "greeting.txt");
  BackupBlob blob = parse_blob(blob_bytes);
  CHECK(blob.client_id == cid);
  CHECK(blob.file_id == "greeting.txt");
  CHECK(blob.original_length == plaintext.size());
  CHECK(blob.original_digest == compute_digest(plaintext));

  auto local = services.main->store().find_client(cid);
  const SeedBlock seed = derive_seed(*local->nonce, cid);
  CHECK(blob.payload ==
        tiled_xor_oracle(plaintext, seed.array()));
  CHECK(blob.payload != plaintext);
}

TEST_CASE("an empty file round-trips through the whole pipeline") {
  Services services;
  auto [cid, client] = services.new_client();
  client.put("empty.bin", Bytes{});
  CHECK(client.get("empty.bin").empty());

  BackupBlob blob = parse_blob(services.remote->get_blob(cid, "empty.bin"));
  CHECK(blob.original_length == 0);
  CHECK(blob.payload.empty());
  CHECK(blob.original_digest.hex() ==
        "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST_CASE("a mismatched declared digest stores nothing anywhere") {
  Services services;
  auto [cid, client] = services.new_client();

  httplib::Client raw(services.main_url());
  std::string body = "real body";
  httplib::Headers headers = {
      {"Authorization", "Bearer " + [&] {
         // register a second client to get a token we control here
         ApiClient admin = services.admin_client();
         auto [cid2, token] = admin.register_client();
         return token;
       }()},
      {"X-SBA-Digest", compute_digest(std::string_view("other")).hex()},
      {"X-SBA-Length", std::to_string(body.size())}};
  auto result = raw.Put("/v1/files/cheat.bin", headers, body,
                        "application/octet-stream");
  REQUIRE(result);
  CHECK(result->status == 400);
  CHECK(result->body.find("validation_failed") != std::string::npos);
  CHECK(services.main->store().files().empty());
  CHECK(services.remote->store().files().empty());
}

TEST_CASE("file ids with spaces and unicode survive the HTTP round trip") {
  Services services;
  auto [cid, client] = services.new_client();
  std::mt19937_64 rng(501);
  const std::string file_id = "annual report \xc3\xa9t\xc3\xa9 2026.pdf";
  Bytes content = random_test_bytes(rng, 2048);
  client.put(file_id, content);
  CHECK(client.get(file_id) == content);
  CHECK(parse_blob(services.remote->get_blob(cid, file_id)).file_id ==
        file_id);
}

TEST_CASE("get after local loss asks for recovery instead of lying") {
  Services services;
  auto [cid, client] = services.new_client();
  std::mt19937_64 rng(502);
  Bytes content = random_test_bytes(rng, 300);
  client.put("loss.bin", content);

  ChaosTarget target;
  target.file_id = "loss.bin";
  run_chaos(services.main_dir.path, ChaosAction::remove, target);
  try {
    client.get("loss.bin");
    FAIL("expected not_found with recovery hint");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::not_found);
    CHECK(std::string(e.what()).find("recovery") != std::string::npos);
  }

  client.recover("loss.bin");
  CHECK(client.get("loss.bin") == content);
}

TEST_CASE("get after local corruption reports integrity_violation") {
  Services services;
  auto [cid, client] = services.new_client();
  std::mt19937_64 rng(503);
  Bytes content = random_test_bytes(rng, 256);
  client.put("dented.bin", content);

  ChaosTarget target;
  target.file_id = "dented.bin";
  run_chaos(services.main_dir.path, ChaosAction::corrupt, target, 17);
  try {
    client.get("dented.bin");
    FAIL("expected integrity_violation");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::integrity_violation);
  }
  CHECK(client.recover("dented.bin").status == "present");
  CHECK(client.get("dented.bin") == content);
}

TEST_CASE("recovering a healthy file needs force") {
  Services services;
  auto [cid, client] = services.new_client();
  client.put("fine.txt", to_bytes("all good"));
  try {
    client.recover("fine.txt");
    FAIL("expected validation_failed");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::validation_failed);
  }
  CHECK(client.recover("fine.txt", /*force=*/true).status == "present");
}

TEST_CASE("recovering a never-uploaded file is honest not_found") {
  Services services;
  auto [cid, client] = services.new_client();
  try {
    client.recover("never.bin");
    FAIL("expected not_found");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::not_found);
  }
}

TEST_CASE("a damaged remote backup is refused, local store untouched") {
  Services services;
  auto [cid, client] = services.new_client();
  std::mt19937_64 rng(504);
  Bytes content = random_test_bytes(rng, 200);
  client.put("backup.bin", content);
  client.remove("backup.bin");

  // Flip one payload byte of the remote blob on disk.
  Bytes blob_bytes = services.remote->get_blob(cid, "backup.bin");
  BlobHeader header = parse_blob_header(blob_bytes);
  ChaosTarget target;
  target.file_id = "backup.bin";
  run_chaos(services.remote_dir.path, ChaosAction::corrupt, target,
            header.payload_offset + 10);

  try {
    client.recover("backup.bin");
    FAIL("expected integrity_violation");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::integrity_violation);
  }
  auto record = services.main->store().find_file(cid, "backup.bin");
  REQUIRE(record.has_value());
  CHECK(record->status == FileStatus::missing);  // still a tombstone
}

TEST_CASE("deleting a file keeps the backup for recovery") {
  Services services;
  auto [cid, client] = services.new_client();
  std::mt19937_64 rng(505);
  Bytes content = random_test_bytes(rng, 100);
  client.put("keepsake.bin", content);
  client.remove("keepsake.bin");

  try {
    client.get("keepsake.bin");
    FAIL("expected not_found");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::not_found);
  }
  // Tombstone retained, remote copy retained, recovery restores bytes.
  CHECK(services.main->store().find_file(cid, "keepsake.bin").has_value());
  client.recover("keepsake.bin");
  CHECK(client.get("keepsake.bin") == content);
}

TEST_CASE("seed storage is idempotent but refuses conflicting overwrites") {
  Services services;
  ClientId cid = ClientId::random();
  SeedBlock seed = SeedBlock::random();
  services.remote->store_seed(cid, seed);
  CHECK_NOTHROW(services.remote->store_seed(cid, seed));
  CHECK(services.remote->store().clients().size() == 1);

  std::array<std::uint8_t, 16> other = seed.array();
  other[3] ^= 0x01;
  try {
    services.remote->store_seed(cid, SeedBlock::from_bytes(other));
    FAIL("expected integrity_violation");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::integrity_violation);
  }
  CHECK(services.remote->get_seed(cid) == seed);
}

TEST_CASE("remote blob uploads are validated against path and registration") {
  Services services;
  ClientId cid = ClientId::random();
  SeedBlock seed = SeedBlock::random();
  services.remote->store_seed(cid, seed);

  BackupBlob blob;
  blob.client_id = cid;
  blob.file_id = "x.bin";
  blob.payload = to_bytes("payload");
  blob.original_length = blob.payload.size();
  blob.original_digest = compute_digest(blob.payload);
  Bytes good = serialize_blob(blob);

  SUBCASE("junk body") {
    try {
      services.remote->store_blob(cid, "x.bin", to_bytes("not a blob"));
      FAIL("expected validation_failed");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::validation_failed);
    }
  }
  SUBCASE("path client id differs from header") {
    ClientId other = ClientId::random();
    services.remote->store_seed(other, SeedBlock::random());
    try {
      services.remote->store_blob(other, "x.bin", good);
      FAIL("expected validation_failed");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::validation_failed);
    }
  }
  SUBCASE("path file id differs from header") {
    try {
      services.remote->store_blob(cid, "y.bin", good);
      FAIL("expected validation_failed");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::validation_failed);
    }
  }
  SUBCASE("unregistered client") {
    ClientId stranger = ClientId::random();
    BackupBlob foreign = blob;
    foreign.client_id = stranger;
    try {
      services.remote->store_blob(stranger, "x.bin", serialize_blob(foreign));
      FAIL("expected not_registered");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::not_registered);
    }
  }
  SUBCASE("a valid blob stores and returns bit-identical bytes") {
    services.remote->store_blob(cid, "x.bin", good);
    CHECK(services.remote->get_blob(cid, "x.bin") == good);
    CHECK(compute_digest(services.remote->get_blob(cid, "x.bin")) ==
          compute_digest(good));
  }
}

TEST_CASE("blob listing is sorted by file id") {
  Services services;
  auto [cid, client] = services.new_client();
  client.put("b.bin", to_bytes("bb"));
  client.put("a.bin", to_bytes("aa"));
  auto listing = services.remote->list_blobs(cid);
  REQUIRE(listing.size() == 2);
  CHECK(listing[0].file_id == "a.bin");
  CHECK(listing[1].file_id == "b.bin");
  CHECK(listing[0].original_length == 2);

  try {
    services.remote->get_blob(cid, "never-stored.bin");
    FAIL("expected not_found");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::not_found);
  }
}

TEST_CASE("remote endpoints demand the shared secret") {
  Services services;
  auto [cid, client] = services.new_client();
  client.put("private.bin", to_bytes("secret stuff"));

  httplib::Client raw(services.remote_url());
  auto no_auth = raw.Get("/v1/backups/" + cid.hex() + "/private.bin");
  REQUIRE(no_auth);
  CHECK(no_auth->status == 401);

  httplib::Headers bad = {{"Authorization", "Bearer wrong-secret"}};
  auto wrong = raw.Get("/v1/backups/" + cid.hex() + "/private.bin", bad);
  REQUIRE(wrong);
  CHECK(wrong->status == 401);
}

TEST_CASE("main endpoints demand a bearer token") {
  Services services;
  httplib::Client raw(services.main_url());
  auto no_auth = raw.Get("/v1/files/anything");
  REQUIRE(no_auth);
  CHECK(no_auth->status == 401);

  auto wrong_admin = raw.Post("/v1/clients", httplib::Headers{
      {"Authorization", "Bearer wrong"}}, "", "application/json");
  REQUIRE(wrong_admin);
  CHECK(wrong_admin->status == 401);

  // Health stays open.
  auto health = raw.Get("/v1/health");
  REQUIRE(health);
  CHECK(health->status == 200);
}

TEST_CASE("no unauthenticated request ever reaches put storage") {
  Services services;
  auto [cid, client] = services.new_client();
  client.put("real.bin", to_bytes("data"));

  httplib::Client raw(services.main_url());
  auto sneak = raw.Put("/v1/files/sneak.bin", "x", "application/octet-stream");
  REQUIRE(sneak);
  CHECK(sneak->status == 401);
  CHECK_FALSE(services.main->store().find_file(cid, "sneak.bin").has_value());

  // Audit: every successful put has a real client actor; the denied attempt
  // is on record with no actor.
  auto audit = services.main->store().read_audit();
  bool found_denied = false;
  std::uint64_t last_seq = 0;
  for (const auto& entry : audit) {
    CHECK(entry.seq == last_seq + 1);  // gap-free
    last_seq = entry.seq;
    if (entry.action == AuditAction::put) {
      if (entry.outcome == AuditOutcome::ok) {
        CHECK(entry.actor.size() == 32);  // client id hex
      } else {
        found_denied = true;
        CHECK(entry.actor == "-");
      }
    }
  }
  CHECK(found_denied);
}

TEST_CASE("client verify is scoped, admin verify sees everything") {
  Services services;
  auto [cid1, client1] = services.new_client();
  auto [cid2, client2] = services.new_client();
  client1.put("one.bin", to_bytes("1"));
  client2.put("two.bin", to_bytes("2"));

  VerifySummary own = client1.verify();
  REQUIRE(own.files.size() == 1);
  CHECK(own.files[0].file_id == "one.bin");

  httplib::Client raw(services.main_url());
  httplib::Headers admin_headers = {
      {"Authorization", "Bearer " + services.admin_secret}};
  auto result = raw.Get("/v1/verify", admin_headers);
  REQUIRE(result);
  CHECK(result->status == 200);
  CHECK(result->body.find("one.bin") != std::string::npos);
  CHECK(result->body.find("two.bin") != std::string::npos);
}

TEST_CASE("admin recover-all restores a wiped main store") {
  Services services;
  auto [cid1, client1] = services.new_client();
  auto [cid2, client2] = services.new_client();
  std::mt19937_64 rng(506);
  Bytes a = random_test_bytes(rng, 4096);
  Bytes b = random_test_bytes(rng, 100);
  Bytes c = random_test_bytes(rng, 0);
  client1.put("a.bin", a);
  client1.put("c.bin", c);
  client2.put("b.bin", b);

  ChaosTarget all;
  all.all = true;
  run_chaos(services.main_dir.path, ChaosAction::remove, all);

  ApiClient admin = services.admin_client();
  RecoverAllSummary summary = admin.recover_all(std::nullopt);
  CHECK(summary.attempted == 3);
  CHECK(summary.restored == 3);
  CHECK(summary.failed == 0);

  CHECK(client1.get("a.bin") == a);
  CHECK(client1.get("c.bin") == c);
  CHECK(client2.get("b.bin") == b);

  // A clean store yields an empty report.
  RecoverAllSummary again = admin.recover_all(std::nullopt);
  CHECK(again.attempted == 0);
  CHECK(again.files.empty());
}

TEST_CASE("recover-all reports an unrecoverable file without aborting") {
  Services services;
  auto [cid, client] = services.new_client();
  std::mt19937_64 rng(507);
  Bytes a = random_test_bytes(rng, 64);
  Bytes b = random_test_bytes(rng, 64);
  client.put("saved.bin", a);
  client.put("lost-forever.bin", b);

  // Double fault: lose it locally AND at the remote.
  ChaosTarget local;
  local.all = true;
  run_chaos(services.main_dir.path, ChaosAction::remove, local);
  ChaosTarget remote_one;
  remote_one.file_id = "lost-forever.bin";
  run_chaos(services.remote_dir.path, ChaosAction::remove, remote_one);

  ApiClient admin = services.admin_client();
  RecoverAllSummary summary = admin.recover_all(std::nullopt);
  CHECK(summary.attempted == 2);
  CHECK(summary.restored == 1);
  CHECK(summary.failed == 1);
  CHECK(client.get("saved.bin") == a);
}

TEST_CASE("recovery works when the local nonce was lost") {
  Services services;
  auto [cid, client] = services.new_client();
  std::mt19937_64 rng(508);
  Bytes content = random_test_bytes(rng, 512);
  client.put("nonce-loss.bin", content);
  client.remove("nonce-loss.bin");

  // Model a main store that lost its registration nonce.
  auto record = services.main->store().find_client(cid);
  REQUIRE(record.has_value());
  record->nonce.reset();
  services.main->store().update_client(*record);

  client.recover("nonce-loss.bin");
  CHECK(client.get("nonce-loss.bin") == content);
}

TEST_CASE("the aead hook keeps plaintext out of both stores") {
  const std::string key_hex(64, 'e');
  Services services("aead", key_hex);
  auto [cid, client] = services.new_client();
  Bytes plaintext = to_bytes("extremely private words");
  client.put("sealed.bin", plaintext);

  CHECK(client.get("sealed.bin") == plaintext);

  // Local blob on disk is ciphertext.
  auto local_path =
      services.main->store().blob_path(cid, "sealed.bin");
  std::ifstream in(local_path, std::ios::binary);
  Bytes at_rest((std::istreambuf_iterator<char>(in)),
                std::istreambuf_iterator<char>());
  CHECK(at_rest != plaintext);
  CHECK(at_rest.size() > plaintext.size());  // nonce and tag overhead

  // Remote payload decodes to the ciphertext, not the plaintext.
  BackupBlob blob = parse_blob(services.remote->get_blob(cid, "sealed.bin"));
  auto local = services.main->store().find_client(cid);
  const SeedBlock seed = derive_seed(*local->nonce, cid);
  CHECK(recover_bytes(blob.payload, seed) == at_rest);

  // Recovery still restores the same plaintext.
  client.remove("sealed.bin");
  client.recover("sealed.bin");
  CHECK(client.get("sealed.bin") == plaintext);
}

TEST_CASE("health endpoints answer without auth") {
  Services services;
  httplib::Client main_raw(services.main_url());
  httplib::Client remote_raw(services.remote_url());
  CHECK(main_raw.Get("/v1/health")->status == 200);
  CHECK(remote_raw.Get("/v1/health")->status == 200);
}
