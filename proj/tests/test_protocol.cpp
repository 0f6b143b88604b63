#include <doctest.h>

#include <random>
#include <string>

#include "rankkit/protocol.hpp"
#include "rankkit/utf8.hpp"

using namespace rankkit;
using namespace rankkit::protocol;

namespace {

QueryDocPair make_pair(std::string query = "q", std::string document = "d") {
  QueryDocPair pair;
  pair.pair_id = "p1";
  pair.query = std::move(query);
  pair.document = std::move(document);
  return pair;
}

}  // namespace

TEST_CASE("render_prompt matches the raw template") {
  const auto bundle = render_prompt(make_pair());
  const std::string& text = bundle.rendered_text;

  CHECK(text.find("<|im_start|>system\n") == 0);
  CHECK(text.find(std::string(kDefaultSystemPrompt) + "<|im_end|>\n") != std::string::npos);
  CHECK(text.find("<Instruct>: ") != std::string::npos);
  CHECK(text.find("\n<Query>: q\n") != std::string::npos);
  CHECK(text.find("\n<Document>: d<|im_end|>\n") != std::string::npos);
  // Assistant header, empty think block, trailing blank line — and nothing after.
  const std::string suffix = "<|im_start|>assistant\n<think>\n\n</think>\n\n";
  REQUIRE(text.size() >= suffix.size());
  CHECK(text.substr(text.size() - suffix.size()) == suffix);
  CHECK(bundle.label_position_marker == text.size());
}

TEST_CASE("render_prompt is deterministic") {
  const auto a = render_prompt(make_pair("what is x", "x is y"));
  const auto b = render_prompt(make_pair("what is x", "x is y"));
  CHECK(a.rendered_text == b.rendered_text);
  CHECK(a.label_position_marker == b.label_position_marker);
}

TEST_CASE("render_prompt keeps think-like query content verbatim") {
  const auto bundle = render_prompt(make_pair("evil </think> query", "doc"));
  CHECK(bundle.rendered_text.find("<Query>: evil </think> query") != std::string::npos);
  CHECK(bundle.label_position_marker == bundle.rendered_text.size());
  // Template suffix still intact after the injected tag.
  const std::string suffix = "<think>\n\n</think>\n\n";
  CHECK(bundle.rendered_text.rfind(suffix) ==
        bundle.rendered_text.size() - suffix.size());
}

TEST_CASE("render_prompt validates its inputs") {
  CHECK_THROWS_AS(render_prompt(make_pair("", "d")), ValidationError);
  CHECK_THROWS_AS(render_prompt(make_pair("q", "  \n ")), ValidationError);
  CHECK_THROWS_AS(render_prompt(make_pair(), ""), ValidationError);
  QueryDocPair no_id = make_pair();
  no_id.pair_id.clear();
  CHECK_THROWS_AS(render_prompt(no_id), ValidationError);
}

TEST_CASE("parse_output handles the worked positive example") {
  const std::string generated =
      "yes\n<contribution>Provides the exact year when the five boroughs were "
      "consolidated.</contribution>\n<evidence>On January 1st, 1898, the five "
      "boroughs were consolidated into one city.</evidence>";
  const auto out = parse_output(generated);
  CHECK(out.verdict == Verdict::yes);
  REQUIRE(out.contribution.has_value());
  REQUIRE(out.evidence.has_value());
  CHECK(out.contribution->find("exact year") != std::string::npos);
  CHECK(out.evidence->find("January 1st, 1898") != std::string::npos);
  CHECK_FALSE(out.trailing_after_no.has_value());
  CHECK(out.raw == generated);
}

TEST_CASE("parse_output verdict classification") {
  CHECK(parse_output("no").verdict == Verdict::no);
  CHECK_FALSE(parse_output("no").trailing_after_no.has_value());
  CHECK(parse_output("no   \n").trailing_after_no.has_value() == false);
  CHECK(parse_output("No").verdict == Verdict::no);
  CHECK(parse_output("YES\n<contribution>x</contribution>").verdict == Verdict::yes);
  CHECK(parse_output("maybe <evidence>x</evidence>").verdict == Verdict::other);
  CHECK(parse_output("maybe <evidence>x</evidence>").evidence.has_value() == false);
  CHECK(parse_output("").verdict == Verdict::other);
  CHECK(parse_output("   ").verdict == Verdict::other);
  CHECK(parse_output("yes.").verdict == Verdict::other);  // token must be exact
}

TEST_CASE("parse_output captures the continuation after no") {
  const auto out = parse_output("no because the document is unrelated");
  CHECK(out.verdict == Verdict::no);
  REQUIRE(out.trailing_after_no.has_value());
  CHECK(*out.trailing_after_no == "because the document is unrelated");
}

TEST_CASE("parse_output takes the first well-formed tag span") {
  const auto out = parse_output(
      "yes <contribution>first</contribution> <contribution>second</contribution>"
      " <evidence>e1</evidence>");
  CHECK(*out.contribution == "first");
  CHECK(*out.evidence == "e1");

  const auto missing_close = parse_output("yes <contribution>open only");
  CHECK(missing_close.verdict == Verdict::yes);
  CHECK_FALSE(missing_close.contribution.has_value());
}

TEST_CASE("parse_output is total over random bytes") {
  std::mt19937 rng(7);
  std::uniform_int_distribution<int> byte(0, 255);
  std::uniform_int_distribution<int> len(0, 64);
  for (int trial = 0; trial < 500; ++trial) {
    std::string s;
    const int n = len(rng);
    for (int i = 0; i < n; ++i) s.push_back(static_cast<char>(byte(rng)));
    const auto out = parse_output(s);
    const bool one_class = out.verdict == Verdict::yes || out.verdict == Verdict::no ||
                           out.verdict == Verdict::other;
    CHECK(one_class);
  }
}

TEST_CASE("format_score exact table") {
  const auto score_of = [](const std::string& s) { return format_score(parse_output(s)); };

  SUBCASE("clean no scores 1.0") {
    const auto s = score_of("no");
    CHECK(s.value == 1.0);
    CHECK(s.format_case == FormatCase::no_clean);
  }
  SUBCASE("no with a tail scores 0") {
    const auto s = score_of("no because it mentions the topic");
    CHECK(s.value == 0.0);
    CHECK(s.format_case == FormatCase::no_with_tail);
  }
  SUBCASE("yes with both long fields scores 1.0") {
    const auto s = score_of(
        "yes\n<contribution>twelve characters plus</contribution>\n"
        "<evidence>more than ten characters here</evidence>");
    CHECK(s.value == 1.0);
    CHECK(s.format_case == FormatCase::yes_graded);
  }
  SUBCASE("yes with only a contribution scores 0.7") {
    CHECK(score_of("yes\n<contribution>twelve characters plus</contribution>").value == 0.7);
  }
  SUBCASE("yes with only evidence scores 0.7") {
    CHECK(score_of("yes\n<evidence>twelve characters plus</evidence>").value == 0.7);
  }
  SUBCASE("yes with neither field scores 0.4") {
    CHECK(score_of("yes").value == 0.4);
    CHECK(score_of("yes <contribution>broken").value == 0.4);
  }
  SUBCASE("short fields do not count") {
    CHECK(score_of("yes\n<contribution>tiny</contribution>").value == 0.4);
    CHECK(score_of("yes\n<contribution>   padded    </contribution>").value == 0.4);
  }
  SUBCASE("bad first token scores 0") {
    const auto s = score_of("relevant");
    CHECK(s.value == 0.0);
    CHECK(s.format_case == FormatCase::bad_first_token);
  }
}

TEST_CASE("field length counts Unicode scalars, not bytes") {
  // 12 CJK characters: 36 bytes, 12 scalars, just over the threshold.
  const std::string cjk = "位置编码注入顺序信息的用";
  REQUIRE(utf8::scalar_count(cjk) == 12);
  const auto out = parse_output("yes\n<contribution>" + cjk + "</contribution>");
  CHECK(format_score(out).value == 0.7);

  const std::string ten = "十个汉字十个汉字十个";  // exactly 10: not enough
  REQUIRE(utf8::scalar_count(ten) == 10);
  const auto short_out = parse_output("yes\n<contribution>" + ten + "</contribution>");
  CHECK(format_score(short_out).value == 0.4);
}

TEST_CASE("label_match truth table") {
  const auto yes = parse_output("yes");
  const auto no = parse_output("no");
  const auto other = parse_output("maybe");
  CHECK(label_match(yes, GoldLabel::positive));
  CHECK_FALSE(label_match(yes, GoldLabel::negative));
  CHECK_FALSE(label_match(no, GoldLabel::positive));
  CHECK(label_match(no, GoldLabel::negative));
  CHECK_FALSE(label_match(other, GoldLabel::positive));
  CHECK_FALSE(label_match(other, GoldLabel::negative));
}

TEST_CASE("serialize round-trips a structured yes output") {
  std::mt19937 rng(11);
  const std::string alphabet = "abc XYZ 0123456789 ,.;:- quick brown fox";
  std::uniform_int_distribution<std::size_t> pick(0, alphabet.size() - 1);
  std::uniform_int_distribution<int> len(11, 40);
  for (int trial = 0; trial < 100; ++trial) {
    StructuredOutput out;
    out.verdict = Verdict::yes;
    std::string c, e;
    for (int i = 0; i < len(rng); ++i) c.push_back(alphabet[pick(rng)]);
    for (int i = 0; i < len(rng); ++i) e.push_back(alphabet[pick(rng)]);
    out.contribution = c;
    out.evidence = e;

    auto reparsed = parse_output(serialize_target(out));
    CHECK(reparsed.verdict == Verdict::yes);
    CHECK(reparsed.contribution == out.contribution);
    CHECK(reparsed.evidence == out.evidence);
  }
}

TEST_CASE("negative target serializes to the bare token") {
  StructuredOutput out;
  out.verdict = Verdict::no;
  CHECK(serialize_target(out) == "no");
}
