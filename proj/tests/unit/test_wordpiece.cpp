#include <doctest.h>

#include "darkscan/error.hpp"
#include "darkscan/wordpiece.hpp"
#include "support.hpp"

#include <json.hpp>

using namespace darkscan;

namespace {

WordPieceTokenizer toy(std::size_t max_len = 8) {
    TokenizerConfig cfg;
    cfg.max_seq_len = max_len;
    return WordPieceTokenizer(Vocab::from_tokens({"[CLS]", "[SEP]", "[UNK]", "[PAD]", "hurry", "un", "##able", "##s", "!"}),
                              cfg);
}

}  // namespace

TEST_CASE("tokenize examples") {
    auto tok = toy();
    auto empty = tok.encode("");
    CHECK(empty.ids == std::vector<std::int64_t>{0, 1, 3, 3, 3, 3, 3, 3});
    CHECK(empty.attention_mask == std::vector<std::int64_t>{1, 1, 0, 0, 0, 0, 0, 0});

    auto hurry = tok.encode("hurry");
    CHECK(hurry.ids == std::vector<std::int64_t>{0, 4, 1, 3, 3, 3, 3, 3});

    auto longer = tok.encode("hurry hurry hurry hurry hurry hurry hurry hurry hurry");
    CHECK(longer.ids.size() == 8);
    CHECK(longer.ids == std::vector<std::int64_t>{0, 4, 4, 4, 4, 4, 4, 1});
    CHECK(longer.attention_mask == std::vector<std::int64_t>(8, 1));
}

TEST_CASE("greedy longest match with continuation pieces") {
    auto tok = toy(16);
    CHECK(tok.wordpiece_ids("unable") == std::vector<std::int64_t>{5, 6});
    CHECK(tok.wordpiece_ids("hurrys") == std::vector<std::int64_t>{4, 7});
    CHECK(tok.wordpiece_ids("unablex") == std::vector<std::int64_t>{2});
    CHECK(tok.encode("HURRY!").ids[1] == 4);
    CHECK(tok.encode("HURRY!").ids[2] == 8);
    CHECK(tok.basic_tokenize("Hurry!  Now,ok") == std::vector<std::string>{"hurry", "!", "now", ",", "ok"});
}

TEST_CASE("truncation keeps the separator even when a word spans the cut") {
    auto tok = toy(4);
    CHECK(tok.encode("unable unable").ids == std::vector<std::int64_t>{0, 5, 6, 1});
    CHECK(tok.encode("hurry unable").ids == std::vector<std::int64_t>{0, 4, 5, 1});
}

TEST_CASE("missing markers and bad lengths are rejected") {
    TokenizerConfig cfg;
    CHECK_THROWS_AS(WordPieceTokenizer(Vocab::from_tokens({"[CLS]", "[SEP]", "[PAD]"}), cfg), VocabMissingMarkers);
    cfg.max_seq_len = 1;
    CHECK_THROWS_AS(WordPieceTokenizer(Vocab::from_tokens({"[CLS]", "[SEP]", "[UNK]", "[PAD]"}), cfg), InvalidArgument);
}

TEST_CASE("lowercasing off keeps case and accents") {
    TokenizerConfig cfg;
    cfg.lowercase = false;
    WordPieceTokenizer tok(Vocab::from_tokens({"[CLS]", "[SEP]", "[UNK]", "[PAD]"}), cfg);
    CHECK(tok.basic_tokenize("Café Hurry") == std::vector<std::string>{"Café", "Hurry"});
}

TEST_CASE("vocab file ids are line numbers") {
    testing::TempDir tmp;
    testing::write_file(tmp / "vocab.txt", "[PAD]\r\n[UNK]\n[CLS]\n[SEP]\nhurry\n");
    auto v = Vocab::from_file(tmp / "vocab.txt");
    CHECK(v.size() == 5);
    CHECK(v.id("hurry") == 4);
    CHECK(v.id("[PAD]") == 0);
    CHECK_FALSE(v.id("nope").has_value());
    CHECK(v.token(2) == "[CLS]");
    CHECK_THROWS_AS((void)Vocab::from_file(tmp / "missing.txt"), FileUnreadable);
}

TEST_CASE("matches the reference BERT tokenizer on the probe texts") {
    auto dir = testing::fixtures() / "onnx" / "tiny_bert";
    auto expected = nlohmann::json::parse(testing::read_file(dir / "expected.json"));
    TokenizerConfig cfg;
    cfg.max_seq_len = expected["max_seq_len"].get<std::size_t>();
    WordPieceTokenizer tok(Vocab::from_file(dir / "vocab.txt"), cfg);
    for (const auto& probe : expected["probes"]) {
        auto text = probe["text"].get<std::string>();
        CAPTURE(text);
        auto enc = tok.encode(text);
        CHECK(enc.ids == probe["ids"].get<std::vector<std::int64_t>>());
        CHECK(enc.attention_mask == probe["mask"].get<std::vector<std::int64_t>>());
        for (auto id : enc.ids) CHECK(static_cast<std::size_t>(id) < tok.vocab().size());
    }
}
