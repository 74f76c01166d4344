#include "itemdeps/external_oracle.hpp"

#include <gtest/gtest.h>
#include <sys/stat.h>

#include <fstream>
#include <thread>

namespace itemdeps {
namespace {

using namespace std::chrono_literals;

class ExternalOracleTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = std::filesystem::temp_directory_path() /
           ("itemdeps-ext-test-" + std::to_string(::getpid()) + "-" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    std::filesystem::create_directories(dir_);
    Item a;
    a.id = ItemId::parse("a:definition:1");
    a.defines = {"s1"};
    Item b;
    b.id = ItemId::parse("b:definition:1");
    Item c;
    c.id = ItemId::parse("c:theorem:1");
    c.body = "theorem body\n";
    corpus_ = Corpus::from_items({a, b, c});
  }
  void TearDown() override { std::filesystem::remove_all(dir_); }

  std::string script(const std::string& name, const std::string& body) {
    auto path = dir_ / name;
    std::ofstream(path) << "#!/bin/sh\n" << body << "\n";
    ::chmod(path.c_str(), 0755);
    return path.string();
  }

  const Item& target() const { return corpus_[2]; }

  std::filesystem::path dir_;
  Corpus corpus_;
};

TEST_F(ExternalOracleTest, AlwaysZeroIsVerifiable) {
  auto cmd = script("yes.sh", "exit 0");
  EXPECT_EQ(verify_external(target(), {}, corpus_, cmd, 5s), VerificationOutcome::verifiable());
}

TEST_F(ExternalOracleTest, ManifestDrivesTheAnswer) {
  auto cmd = script("needs_a.sh", "grep -qx 'a:definition:1' \"$1/manifest\"");
  ExternalOracle oracle(corpus_, {cmd, 5s});
  const ItemId with_a[] = {ItemId::parse("b:definition:1"), ItemId::parse("a:definition:1")};
  const ItemId without_a[] = {ItemId::parse("b:definition:1")};
  EXPECT_EQ(oracle.verify(target(), with_a), VerificationOutcome::verifiable());
  EXPECT_EQ(oracle.verify(target(), without_a), VerificationOutcome::not_verifiable());
}

TEST_F(ExternalOracleTest, SandboxLayout) {
  // Manifest is in corpus order and LF-terminated; item.txt holds the body.
  auto cmd = script("layout.sh",
                    "printf 'a:definition:1\\nb:definition:1\\n' | cmp -s - \"$1/manifest\" || exit 3\n"
                    "printf 'theorem body\\n' | cmp -s - \"$1/item.txt\" || exit 4\n"
                    "[ \"$(ls \"$1\" | tr '\\n' ' ')\" = 'item.txt manifest ' ] || exit 5\n"
                    "exit 0");
  ExternalOracle oracle(corpus_, {cmd, 5s});
  const ItemId shuffled[] = {ItemId::parse("b:definition:1"), ItemId::parse("a:definition:1")};
  EXPECT_EQ(oracle.verify(target(), shuffled), VerificationOutcome::verifiable());
}

TEST_F(ExternalOracleTest, MissingBodyGivesEmptyItemFile) {
  auto cmd = script("empty.sh", "[ -f \"$1/item.txt\" ] && [ ! -s \"$1/item.txt\" ]");
  ExternalOracle oracle(corpus_, {cmd, 5s});
  EXPECT_TRUE(oracle.verify(corpus_[1], {}).is_verifiable());
}

TEST_F(ExternalOracleTest, OtherExitStatusIsAnError) {
  auto cmd = script("seven.sh", "exit 7");
  auto outcome = verify_external(target(), {}, corpus_, cmd, 5s);
  ASSERT_TRUE(outcome.is_error());
  EXPECT_EQ(outcome.message(), "exit status 7");
}

TEST_F(ExternalOracleTest, DiagnosticsAreCaptured) {
  auto cmd = script("boom.sh", "echo boom >&2\nexit 3");
  auto outcome = verify_external(target(), {}, corpus_, cmd, 5s);
  ASSERT_TRUE(outcome.is_error());
  EXPECT_EQ(outcome.message(), "exit status 3: boom");
}

TEST_F(ExternalOracleTest, TimeoutIsAnError) {
  auto cmd = script("slow.sh", "sleep 10\nexit 0");
  auto start = std::chrono::steady_clock::now();
  auto outcome = verify_external(target(), {}, corpus_, cmd, 200ms);
  EXPECT_EQ(outcome, VerificationOutcome::error("timeout"));
  EXPECT_LT(std::chrono::steady_clock::now() - start, 5s);
}

TEST_F(ExternalOracleTest, SignalIsAnError) {
  auto cmd = script("kill.sh", "kill -9 $$");
  auto outcome = verify_external(target(), {}, corpus_, cmd, 5s);
  ASSERT_TRUE(outcome.is_error());
  EXPECT_EQ(outcome.message().rfind("killed by signal 9", 0), 0u) << outcome.message();
}

TEST_F(ExternalOracleTest, ForwardDependencyIsAnError) {
  auto cmd = script("yes.sh", "exit 0");
  ExternalOracle oracle(corpus_, {cmd, 5s});
  const ItemId forward[] = {ItemId::parse("c:theorem:1")};
  EXPECT_TRUE(oracle.verify(corpus_[0], forward).is_error());
}

TEST_F(ExternalOracleTest, RejectsUnusableConfiguration) {
  EXPECT_THROW(ExternalOracle(corpus_, {(dir_ / "missing.sh").string(), 5s}), std::invalid_argument);
  auto path = dir_ / "plain.txt";
  std::ofstream(path) << "not executable";
  EXPECT_THROW(ExternalOracle(corpus_, {path.string(), 5s}), std::invalid_argument);
  EXPECT_THROW(ExternalOracle(corpus_, {script("ok.sh", "exit 0"), 0ms}), std::invalid_argument);
  EXPECT_NO_THROW(ExternalOracle(corpus_, {"true", 5s}));  // PATH lookup
}

TEST_F(ExternalOracleTest, ConcurrentCallsUseSeparateSandboxes) {
  auto cmd = script("needs_a.sh", "grep -qx 'a:definition:1' \"$1/manifest\"");
  ExternalOracle oracle(corpus_, {cmd, 10s});
  std::vector<std::thread> threads;
  std::atomic<int> wrong{0};
  for (int t = 0; t < 8; ++t) {
    threads.emplace_back([&, t] {
      for (int i = 0; i < 5; ++i) {
        bool include = (t + i) % 2 == 0;
        std::vector<ItemId> deps;
        if (include) deps.push_back(ItemId::parse("a:definition:1"));
        if (oracle.verify(target(), deps).is_verifiable() != include) ++wrong;
      }
    });
  }
  for (auto& th : threads) th.join();
  EXPECT_EQ(wrong.load(), 0);
}

}  // namespace
}  // namespace itemdeps
