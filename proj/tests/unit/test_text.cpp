#include <doctest.h>

#include "darkscan/text.hpp"

using namespace darkscan;

TEST_CASE("normalize_text examples") {
    CHECK(normalize_text("  Hurry!\n Only 2 left ") == "Hurry! Only 2 left");
    CHECK(normalize_text("") == "");
    CHECK(normalize_text("a\tb") == "a b");
}

TEST_CASE("normalize_text composes to NFC and strips control characters") {
    CHECK(normalize_text("Café") == "Café");
    CHECK(normalize_text("a\x01" "b\x7f") == "ab");
    CHECK(normalize_text("x\r\n\r\ny z") == "x y z");
    CHECK(normalize_text("  ") == "");
}

TEST_CASE("normalize_text repairs invalid UTF-8 and is idempotent") {
    std::string bad = "ok\xff" "done";
    std::string once = normalize_text(bad);
    CHECK(is_valid_utf8(once));
    CHECK(once.find("\xEF\xBF\xBD") != std::string::npos);
    for (const char* s : {"  Hurry!\n Only 2 left ", "a\tb", "Café ok", "\xff\xfe"}) {
        auto n = normalize_text(s);
        CHECK(normalize_text(n) == n);
    }
}

TEST_CASE("utf8 helpers") {
    CHECK(to_lower_utf8("ÀÉÎ Hurry") == "àéî hurry");
    CHECK(codepoint_count("héllo") == 5);
    CHECK(codepoint_count("") == 0);
    CHECK(has_letter("abc"));
    CHECK_FALSE(has_letter("12 %!"));
    CHECK(has_letter("中"));
    CHECK(is_valid_utf8("plain"));
    CHECK_FALSE(is_valid_utf8("\xc3"));
    CHECK(ascii_lower("MiXeD") == "mixed");
    CHECK(trim_ascii("  x y \n") == "x y");
}

TEST_CASE("fnv1a64 reference values") {
    CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
    CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
    CHECK(fnv1a64("foobar") == 0x85944171f73967e8ULL);
}
