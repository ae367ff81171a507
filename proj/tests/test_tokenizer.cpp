#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>

#include "lemmarec/dataprep.hpp"
#include "lemmarec/errors.hpp"
#include "lemmarec/tokenizer.hpp"

using namespace lemmarec;

TEST_CASE("first merge on 'aaab' is the overlapping pair (a,a)") {
    const bpe::Vocab vocab = bpe::train_bpe({"aaab"}, 260);
    REQUIRE(vocab.merges().size() == 1);
    const int a_id = bpe::kByteBase + 'a';
    CHECK(vocab.merges()[0].left == a_id);
    CHECK(vocab.merges()[0].right == a_id);
    CHECK(vocab.token_bytes(259) == "aa");
}

TEST_CASE("training is deterministic") {
    const auto corpus = data::sample_lemmas(400, 9);
    const bpe::Vocab a = bpe::train_bpe(corpus, 400);
    const bpe::Vocab b = bpe::train_bpe(corpus, 400);
    REQUIRE(a.merges().size() == b.merges().size());
    for (std::size_t i = 0; i < a.merges().size(); ++i) {
        CHECK(a.merges()[i].left == b.merges()[i].left);
        CHECK(a.merges()[i].right == b.merges()[i].right);
    }
    CHECK(a.hash() == b.hash());
}

TEST_CASE("vocab size below the byte minimum is a config error") {
    CHECK_THROWS_AS(bpe::train_bpe({"abc"}, 259), ConfigError);
    CHECK_THROWS_AS(bpe::train_bpe({}, 400), ConfigError);
}

TEST_CASE("round trip on every corpus lemma, specials reserved") {
    const auto corpus = data::sample_lemmas(500, 4);
    const bpe::Vocab vocab = bpe::train_bpe(corpus, 512);
    for (const auto& lemma : corpus) {
        const auto ids = vocab.encode(lemma);
        for (int id : ids) CHECK(id >= bpe::kByteBase);
        CHECK(vocab.decode(ids) == lemma);
        CHECK(ids.size() <= lemma.size());  // merges never lengthen
    }
}

TEST_CASE("byte fallback covers strings outside the training corpus") {
    const bpe::Vocab vocab = bpe::train_bpe({"salus", "salvus", "saltus"}, 300);
    const std::string samples[] = {"", "zzz quux!", "sālus", "\xF0\x9F\x98\x80"};
    for (const auto& s : samples) {
        CHECK(vocab.decode(vocab.encode(s)) == s);
    }
}

TEST_CASE("empty string encodes to the empty sequence") {
    const bpe::Vocab vocab = bpe::train_bpe({"aa"}, 260);
    CHECK(vocab.encode("").empty());
    CHECK(vocab.decode({}).empty());
}

TEST_CASE("token count is non-increasing as the vocabulary grows") {
    const auto corpus = data::sample_lemmas(300, 21);
    const bpe::Vocab small = bpe::train_bpe(corpus, 280);
    const bpe::Vocab large = bpe::train_bpe(corpus, 480);
    for (const auto& lemma : corpus) {
        CHECK(large.encode(lemma).size() <= small.encode(lemma).size());
    }
}

TEST_CASE("serialization reloads bit-exactly") {
    const auto corpus = data::sample_lemmas(200, 13);
    const bpe::Vocab vocab = bpe::train_bpe(corpus, 350);
    const auto path = std::filesystem::temp_directory_path() / "lemmarec_vocab_test.txt";
    vocab.save(path);
    const bpe::Vocab back = bpe::Vocab::load(path);
    CHECK(back.serialize() == vocab.serialize());
    CHECK(back.hash() == vocab.hash());
    for (const auto& lemma : corpus) CHECK(back.encode(lemma) == vocab.encode(lemma));
    std::filesystem::remove(path);
}

TEST_CASE("decode rejects unknown ids") {
    const bpe::Vocab vocab;
    CHECK_THROWS_AS(vocab.decode({9999}), FormatError);
    CHECK_THROWS_AS(vocab.decode({-1}), FormatError);
}

TEST_CASE("specials skipped when decoding model output sequences") {
    const bpe::Vocab vocab;
    const std::vector<int> ids{bpe::kBosId, bpe::kByteBase + 'o', bpe::kByteBase + 'k', bpe::kEosId, bpe::kPadId};
    CHECK(vocab.decode(ids) == "ok");
}
