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

#include <fstream>
#include <random>
#include <set>
#include <thread>

#include "sba/clock.hpp"
#include "sba/digest.hpp"
#include "sba/fault.hpp"
#include "sba/store.hpp"
#include "test_util.hpp"

using namespace sba;
using namespace sba::test;

namespace {

ClientRecord main_client(std::mt19937_64& rng) {
  ClientRecord rec;
  rec.client_id = ClientId::from_bytes(random_test_bytes(rng, 16));
  rec.nonce = RandomNonce::from_bytes(random_test_bytes(rng, 16));
  rec.token_hash = compute_digest(random_test_bytes(rng, 32));
  rec.registered_at = now_iso8601_utc();
  return rec;
}

FileRecord put_bytes(Store& store, const ClientId& id,
                     const std::string& file_id, const Bytes& content) {
  return store.put_object(id, file_id, content, compute_digest(content));
}

}  // namespace

TEST_CASE("put then get returns identical bytes") {
  TempDir dir;
  std::mt19937_64 rng(301);
  auto store = Store::open(dir.path, StoreRole::main);
  ClientRecord client = main_client(rng);
  store->add_client(client);

  Bytes content = random_test_bytes(rng, 1234);
  FileRecord rec = put_bytes(*store, client.client_id, "a.bin", content);
  CHECK(rec.status == FileStatus::present);
  CHECK(rec.length == content.size());

  auto [read, rec2] = store->get_object(client.client_id, "a.bin");
  CHECK(read == content);
  CHECK(rec2.digest == rec.digest);
}

TEST_CASE("overwrite is last-writer-wins") {
  TempDir dir;
  std::mt19937_64 rng(302);
  auto store = Store::open(dir.path, StoreRole::main);
  ClientRecord client = main_client(rng);
  store->add_client(client);

  FileRecord first =
      put_bytes(*store, client.client_id, "f", random_test_bytes(rng, 100));
  Bytes second_content = random_test_bytes(rng, 999);
  FileRecord second =
      put_bytes(*store, client.client_id, "f", second_content);
  CHECK(second.updated_at >= first.updated_at);
  CHECK(second.length == 999);
  CHECK(store->get_object(client.client_id, "f").first == second_content);
}

TEST_CASE("get of a never-put key is not_found") {
  TempDir dir;
  std::mt19937_64 rng(303);
  auto store = Store::open(dir.path, StoreRole::main);
  ClientRecord client = main_client(rng);
  store->add_client(client);
  try {
    store->get_object(client.client_id, "ghost");
    FAIL("expected not_found");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::not_found);
  }
}

TEST_CASE("put for an unknown client is not_registered") {
  TempDir dir;
  std::mt19937_64 rng(304);
  auto store = Store::open(dir.path, StoreRole::main);
  try {
    put_bytes(*store, ClientId::random(), "x", {});
    FAIL("expected not_registered");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::not_registered);
  }
}

TEST_CASE("delete keeps a tombstone and a second delete is not_found") {
  TempDir dir;
  std::mt19937_64 rng(305);
  auto store = Store::open(dir.path, StoreRole::main);
  ClientRecord client = main_client(rng);
  store->add_client(client);
  put_bytes(*store, client.client_id, "doomed", random_test_bytes(rng, 64));

  store->delete_object(client.client_id, "doomed");
  auto record = store->find_file(client.client_id, "doomed");
  REQUIRE(record.has_value());
  CHECK(record->status == FileStatus::missing);

  try {
    store->get_object(client.client_id, "doomed");
    FAIL("expected not_found");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::not_found);
  }
  CHECK_THROWS_AS(store->delete_object(client.client_id, "doomed"), Error);
}

TEST_CASE("every single-byte flip is caught on read") {
  TempDir dir;
  std::mt19937_64 rng(306);
  auto store = Store::open(dir.path, StoreRole::main);
  ClientRecord client = main_client(rng);
  store->add_client(client);
  Bytes content = random_test_bytes(rng, 64);
  put_bytes(*store, client.client_id, "flip", content);
  const auto blob = store->blob_path(client.client_id, "flip");

  for (std::size_t i = 0; i < content.size(); ++i) {
    {
      std::fstream f(blob, std::ios::in | std::ios::out | std::ios::binary);
      f.seekp(static_cast<std::streamoff>(i));
      char byte = static_cast<char>(content[i] ^ 0xff);
      f.write(&byte, 1);
    }
    try {
      store->get_object(client.client_id, "flip");
      FAIL("flip at ", i, " escaped detection");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::integrity_violation);
    }
    CHECK(store->find_file(client.client_id, "flip")->status ==
          FileStatus::corrupt);
    {
      std::fstream f(blob, std::ios::in | std::ios::out | std::ios::binary);
      f.seekp(static_cast<std::streamoff>(i));
      char byte = static_cast<char>(content[i]);
      f.write(&byte, 1);
    }
    // A clean read heals the status.
    CHECK(store->get_object(client.client_id, "flip").first == content);
    CHECK(store->find_file(client.client_id, "flip")->status ==
          FileStatus::present);
  }
}

TEST_CASE("audit sequence is monotonic and survives reopen") {
  TempDir dir;
  std::uint64_t first, second;
  {
    auto store = Store::open(dir.path, StoreRole::main);
    first = store->append_audit("admin", AuditAction::verify, "-",
                                AuditOutcome::ok);
    second = store->append_audit("admin", AuditAction::verify, "-",
                                 AuditOutcome::ok);
    CHECK(second == first + 1);
  }
  {
    auto store = Store::open(dir.path, StoreRole::main);
    auto entries = store->read_audit();
    REQUIRE(entries.size() == 2);
    CHECK(entries[0].seq == first);
    CHECK(entries[1].seq == second);
    CHECK(store->append_audit("admin", AuditAction::verify, "-",
                              AuditOutcome::ok) == second + 1);
  }
}

TEST_CASE("100 concurrent audit appends produce consecutive sequences") {
  TempDir dir;
  auto store = Store::open(dir.path, StoreRole::main);
  std::vector<std::thread> pool;
  std::mutex mu;
  std::set<std::uint64_t> seqs;
  for (int t = 0; t < 10; ++t) {
    pool.emplace_back([&] {
      for (int i = 0; i < 10; ++i) {
        std::uint64_t seq = store->append_audit(
            "admin", AuditAction::put, "load", AuditOutcome::ok);
        std::lock_guard lock(mu);
        seqs.insert(seq);
      }
    });
  }
  for (auto& t : pool) t.join();
  REQUIRE(seqs.size() == 100);
  CHECK(*seqs.begin() == 1);
  CHECK(*seqs.rbegin() == 100);
}

TEST_CASE("fsck classifies present, missing and corrupt") {
  TempDir dir;
  std::mt19937_64 rng(307);
  auto store = Store::open(dir.path, StoreRole::main);
  ClientRecord client = main_client(rng);
  store->add_client(client);
  put_bytes(*store, client.client_id, "ok", random_test_bytes(rng, 32));
  put_bytes(*store, client.client_id, "gone", random_test_bytes(rng, 32));
  put_bytes(*store, client.client_id, "bad", random_test_bytes(rng, 32));

  FsckReport clean = store->fsck();
  CHECK(clean.present == 3);
  CHECK(clean.all_present());

  std::filesystem::remove(store->blob_path(client.client_id, "gone"));
  {
    std::fstream f(store->blob_path(client.client_id, "bad"),
                   std::ios::in | std::ios::out | std::ios::binary);
    char byte = 0x5a;
    f.write(&byte, 1);
  }

  FsckReport report = store->fsck();
  CHECK(report.present == 1);
  CHECK(report.missing == 1);
  CHECK(report.corrupt == 1);
  CHECK(store->find_file(client.client_id, "gone")->status ==
        FileStatus::missing);
  CHECK(store->find_file(client.client_id, "bad")->status ==
        FileStatus::corrupt);
}

TEST_CASE("fsck never reports a record whose client is absent") {
  TempDir dir;
  std::mt19937_64 rng(308);
  auto store = Store::open(dir.path, StoreRole::main);
  ClientRecord client = main_client(rng);
  store->add_client(client);
  put_bytes(*store, client.client_id, "f", random_test_bytes(rng, 8));
  store->remove_client(client.client_id);
  CHECK(store->fsck().entries.empty());
  CHECK(store->files().empty());
}

TEST_CASE("crash at any storage injection point leaves a consistent store") {
  const std::string_view points[] = {
      "storage.put.mid_temp_write",
      "storage.put.after_temp_write",
      "storage.put.after_blob_rename",
      "storage.manifest.after_temp_write",
      "storage.manifest.after_rename",
  };
  std::mt19937_64 rng(309);
  for (std::string_view point : points) {
    CAPTURE(point);
    TempDir dir;
    ClientRecord client = main_client(rng);
    Bytes before = random_test_bytes(rng, 256);
    {
      auto store = Store::open(dir.path, StoreRole::main);
      store->add_client(client);
      put_bytes(*store, client.client_id, "steady", before);

      FaultInjector::instance().arm(std::string(point),
                                    FaultInjector::Mode::throw_exception);
      Bytes incoming = random_test_bytes(rng, 512);
      try {
        put_bytes(*store, client.client_id, "victim", incoming);
        FAIL("crash point never fired: ", point);
      } catch (const CrashPointHit&) {
      }
      FaultInjector::instance().disarm();
      // Store discarded without cleanup, like a dead process.
    }

    auto reopened = Store::open(dir.path, StoreRole::main);
    FsckReport report = reopened->fsck();
    // The pre-existing file must be untouched.
    CHECK(reopened->get_object(client.client_id, "steady").first == before);
    auto victim = reopened->find_file(client.client_id, "victim");
    if (victim) {
      // Fully committed: bytes must verify.
      CHECK(victim->status == FileStatus::present);
      CHECK(report.corrupt == 0);
      CHECK(report.missing == 0);
    } else {
      // Fully absent: no stray files anywhere.
      CHECK(report.all_present());
      std::size_t blob_files = 0;
      for (auto& entry : std::filesystem::recursive_directory_iterator(
               dir.path / "blobs")) {
        if (entry.is_regular_file()) ++blob_files;
      }
      CHECK(blob_files == 1);  // only "steady"
    }
  }
}

TEST_CASE("a second open refuses the wrong role") {
  TempDir dir;
  { auto store = Store::open(dir.path, StoreRole::main); }
  CHECK_THROWS_AS(Store::open(dir.path, StoreRole::remote), Error);
}

TEST_CASE("manifest referential integrity is enforced on load") {
  TempDir dir;
  { auto store = Store::open(dir.path, StoreRole::main); }
  std::ofstream(dir.path / "manifest.json")
      << R"({"format_version":1,"role":"main","clients":[],"files":[
           {"client_id":"00112233445566778899aabbccddeeff","file_id":"x",
            "length":0,
            "digest":"e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855",
            "updated_at":"2026-01-01T00:00:00Z","status":"present"}]})";
  CHECK_THROWS_AS(Store::open(dir.path, StoreRole::main), Error);
}

TEST_CASE("file ids with hostile names stay inside the blobs directory") {
  TempDir dir;
  std::mt19937_64 rng(310);
  auto store = Store::open(dir.path, StoreRole::main);
  ClientRecord client = main_client(rng);
  store->add_client(client);

  for (const std::string& file_id :
       {std::string(".."), std::string("."), std::string("a b\tc"),
        std::string("sp\xc3\xa9" "cial"), std::string("%41already")}) {
    CAPTURE(file_id);
    Bytes content = random_test_bytes(rng, 10);
    put_bytes(*store, client.client_id, file_id, content);
    auto path = store->blob_path(client.client_id, file_id);
    CHECK(path.parent_path() ==
          dir.path / "blobs" / client.client_id.hex());
    CHECK(std::filesystem::exists(path));
    CHECK(store->get_object(client.client_id, file_id).first == content);
    CHECK(unescape_component(path.filename().string()) == file_id);
  }
}

TEST_CASE("open removes stray temps and unreferenced blobs") {
  TempDir dir;
  std::mt19937_64 rng(311);
  ClientId cid;
  {
    auto store = Store::open(dir.path, StoreRole::main);
    ClientRecord client = main_client(rng);
    cid = client.client_id;
    store->add_client(client);
    put_bytes(*store, cid, "keep", random_test_bytes(rng, 16));
  }
  const auto client_dir = dir.path / "blobs" / cid.hex();
  std::ofstream(client_dir / ".tmp.999.1") << "zzz";
  std::ofstream(client_dir / "orphan") << "zzz";
  std::ofstream(dir.path / "manifest.json.tmp.999.1") << "{}";
  std::filesystem::create_directories(dir.path / "blobs" / "deadbeef");

  auto store = Store::open(dir.path, StoreRole::main);
  CHECK(std::filesystem::exists(client_dir / "keep"));
  CHECK_FALSE(std::filesystem::exists(client_dir / ".tmp.999.1"));
  CHECK_FALSE(std::filesystem::exists(client_dir / "orphan"));
  CHECK_FALSE(std::filesystem::exists(dir.path / "manifest.json.tmp.999.1"));
  CHECK_FALSE(std::filesystem::exists(dir.path / "blobs" / "deadbeef"));
}

TEST_CASE("abort_put leaves no trace") {
  TempDir dir;
  std::mt19937_64 rng(312);
  auto store = Store::open(dir.path, StoreRole::main);
  ClientRecord client = main_client(rng);
  store->add_client(client);

  Bytes content = random_test_bytes(rng, 128);
  StagedPut staged =
      store->stage_put(client.client_id, "aborted", content,
                       compute_digest(content));
  store->abort_put(std::move(staged));
  CHECK_FALSE(store->find_file(client.client_id, "aborted").has_value());
  std::size_t files = 0;
  for (auto& entry : std::filesystem::recursive_directory_iterator(
           dir.path / "blobs")) {
    if (entry.is_regular_file()) ++files;
  }
  CHECK(files == 0);
}

TEST_CASE("duplicate client registration is refused") {
  TempDir dir;
  std::mt19937_64 rng(313);
  auto store = Store::open(dir.path, StoreRole::main);
  ClientRecord client = main_client(rng);
  store->add_client(client);
  try {
    store->add_client(client);
    FAIL("expected integrity_violation");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::integrity_violation);
  }
}

TEST_CASE("audit subjects with tabs stay one line per entry") {
  TempDir dir;
  auto store = Store::open(dir.path, StoreRole::main);
  store->append_audit("admin", AuditAction::put, "weird\tname\n",
                      AuditOutcome::ok);
  auto entries = store->read_audit();
  REQUIRE(entries.size() == 1);
  CHECK(entries[0].subject.find('\t') == std::string::npos);
  CHECK(unescape_component(entries[0].subject) == "weird\tname\n");
}
