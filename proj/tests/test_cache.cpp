#include "itemdeps/cache.hpp"

#include <gtest/gtest.h>
#include <unistd.h>

#include <fstream>
#include <functional>
#include <sstream>
#include <thread>

#include "synthetic.hpp"

namespace itemdeps {
namespace {

class LambdaOracle final : public VerificationOracle {
 public:
  using Fn = std::function<VerificationOutcome(const Item&, std::span<const ItemId>)>;
  LambdaOracle(Fn fn, bool deterministic = true)
      : fn_(std::move(fn)), descriptor_{"lambda", true, deterministic} {}
  const OracleDescriptor& descriptor() const override { return descriptor_; }
  VerificationOutcome verify(const Item& item, std::span<const ItemId> deps) const override {
    ++calls;
    return fn_(item, deps);
  }
  mutable std::atomic<int> calls{0};

 private:
  Fn fn_;
  OracleDescriptor descriptor_;
};

class CacheTest : public ::testing::Test {
 protected:
  void SetUp() override {
    path_ = std::filesystem::temp_directory_path() /
            ("itemdeps-cache-" + std::to_string(::getpid()) + "-" +
             ::testing::UnitTest::GetInstance()->current_test_info()->name() + ".tsv");
    std::filesystem::remove(path_);
    item_.id = ItemId::parse("c:theorem:1");
    item_.position = 2;
  }
  void TearDown() override { std::filesystem::remove(path_); }

  std::filesystem::path path_;
  Item item_;
  const ItemId a_ = ItemId::parse("a:definition:1");
  const ItemId b_ = ItemId::parse("b:definition:1");
};

VerificationOutcome yes(const Item&, std::span<const ItemId>) { return VerificationOutcome::verifiable(); }

TEST_F(CacheTest, SecondIdenticalCallHitsTheCache) {
  VerificationCache cache;
  LambdaOracle backend(yes);
  const ItemId deps[] = {a_};
  EXPECT_TRUE(cached_verify(cache, backend, item_, deps).is_verifiable());
  EXPECT_TRUE(cached_verify(cache, backend, item_, deps).is_verifiable());
  EXPECT_EQ(backend.calls.load(), 1);
  EXPECT_EQ(cache.hits(), 1u);
  EXPECT_EQ(cache.misses(), 1u);
}

TEST_F(CacheTest, FingerprintIgnoresOrder) {
  VerificationCache cache;
  LambdaOracle backend(yes);
  const ItemId ab[] = {a_, b_};
  const ItemId ba[] = {b_, a_};
  cached_verify(cache, backend, item_, ab);
  cached_verify(cache, backend, item_, ba);
  EXPECT_EQ(cache.size(), 1u);
  EXPECT_EQ(backend.calls.load(), 1);
  EXPECT_EQ(dependency_fingerprint(ab), dependency_fingerprint(ba));
  EXPECT_EQ(dependency_fingerprint(ab).size(), 64u);
  const ItemId only_a[] = {a_};
  EXPECT_NE(dependency_fingerprint(ab), dependency_fingerprint(only_a));
  EXPECT_NE(dependency_fingerprint(only_a), dependency_fingerprint({}));
}

TEST_F(CacheTest, ErrorsAreNotCached) {
  VerificationCache cache;
  LambdaOracle backend([](const Item&, std::span<const ItemId>) { return VerificationOutcome::error("timeout"); });
  EXPECT_TRUE(cached_verify(cache, backend, item_, {}).is_error());
  EXPECT_TRUE(cached_verify(cache, backend, item_, {}).is_error());
  EXPECT_EQ(backend.calls.load(), 2);
  EXPECT_EQ(cache.size(), 0u);
}

TEST_F(CacheTest, RefusesNondeterministicBackends) {
  VerificationCache cache;
  LambdaOracle backend(yes, /*deterministic=*/false);
  EXPECT_THROW(cached_verify(cache, backend, item_, {}), std::invalid_argument);
  EXPECT_THROW(CachingOracle(cache, backend), std::invalid_argument);
  EXPECT_EQ(backend.calls.load(), 0);
}

TEST_F(CacheTest, PersistedCacheSurvivesRestart) {
  LambdaOracle backend([&](const Item&, std::span<const ItemId> deps) {
    return deps.empty() ? VerificationOutcome::not_verifiable() : VerificationOutcome::verifiable();
  });
  const ItemId deps[] = {a_};
  {
    VerificationCache cache(path_);
    EXPECT_TRUE(cached_verify(cache, backend, item_, deps).is_verifiable());
    EXPECT_FALSE(cached_verify(cache, backend, item_, {}).is_verifiable());
  }
  ASSERT_EQ(backend.calls.load(), 2);
  VerificationCache warm(path_);
  EXPECT_EQ(warm.size(), 2u);
  EXPECT_TRUE(cached_verify(warm, backend, item_, deps).is_verifiable());
  EXPECT_FALSE(cached_verify(warm, backend, item_, {}).is_verifiable());
  EXPECT_EQ(backend.calls.load(), 2);
}

TEST_F(CacheTest, FileFormatIsTabSeparatedRecords) {
  LambdaOracle backend(yes);
  const ItemId deps[] = {a_};
  {
    VerificationCache cache(path_);
    cached_verify(cache, backend, item_, deps);
  }
  std::ifstream in(path_);
  std::stringstream text;
  text << in.rdbuf();
  EXPECT_EQ(text.str(), "c:theorem:1\t" + dependency_fingerprint(deps) + "\tV\n");
}

TEST_F(CacheTest, TornTailIsDroppedAndFileStaysAppendable) {
  const ItemId deps[] = {a_};
  {
    std::ofstream out(path_);
    out << "c:theorem:1\t" << dependency_fingerprint(deps) << "\tV\n"
        << "c:theorem:1\tdeadbe";  // crash mid-write
  }
  LambdaOracle backend(yes);
  {
    VerificationCache cache(path_);
    EXPECT_EQ(cache.size(), 1u);
    cached_verify(cache, backend, item_, {});
  }
  VerificationCache again(path_);
  EXPECT_EQ(again.size(), 2u);
}

TEST_F(CacheTest, MalformedRecordIsRejected) {
  std::ofstream(path_) << "c:theorem:1\tabc\tX\n";
  EXPECT_THROW(VerificationCache cache(path_), std::runtime_error);
}

TEST_F(CacheTest, TransparencyOverRandomQueries) {
  testing::Rng rng(31);
  for (int trial = 0; trial < 100; ++trial) {
    auto corpus = testing::random_small_fixture(rng, 8);
    BuiltinOracle raw(corpus);
    VerificationCache cache;
    CachingOracle cached(cache, raw);
    const auto& target = corpus.items().back();
    auto cands = default_candidates(corpus, target.id).candidates;
    for (int q = 0; q < 20; ++q) {
      std::vector<ItemId> deps;
      for (const auto& c : cands) {
        if (rng() % 2) deps.push_back(c);
      }
      ASSERT_EQ(cached.verify(target, deps), raw.verify(target, deps));
    }
  }
}

TEST_F(CacheTest, ConcurrentUse) {
  VerificationCache cache(path_);
  LambdaOracle backend(yes);
  CachingOracle cached(cache, backend);
  std::vector<std::thread> threads;
  for (int t = 0; t < 8; ++t) {
    threads.emplace_back([&] {
      for (std::uint32_t i = 1; i <= 50; ++i) {
        const ItemId deps[] = {ItemId{"x", ItemKind::lemma, i}};
        cached.verify(item_, deps);
      }
    });
  }
  for (auto& th : threads) th.join();
  EXPECT_EQ(cache.size(), 50u);
  VerificationCache reloaded(path_);
  EXPECT_EQ(reloaded.size(), 50u);
}

}  // namespace
}  // namespace itemdeps
