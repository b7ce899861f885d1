#include "revmark/normalize.hpp"

#include <gtest/gtest.h>

namespace revmark {
namespace {

TEST(Normalize, CaseFoldsAndCollapsesWhitespace) {
  EXPECT_EQ(normalize("  This   Paper\tEXPLORES\n the  problem "), "this paper explores the problem");
}

TEST(Normalize, CurlyQuotesBecomeStraight) {
  EXPECT_EQ(normalize("\xE2\x80\x9C" "local intrinsic dimensionality," "\xE2\x80\x9D"),
            "\"local intrinsic dimensionality,\"");
  EXPECT_EQ(normalize("Ellsworth et al.\xE2\x80\x99s"), "ellsworth et al.'s");
}

TEST(Normalize, DropsMarkdownEmphasis) {
  EXPECT_EQ(normalize("**The manuscript investigates** the _issue_"), "the manuscript investigates the issue");
}

TEST(Normalize, ComposesToNfc) {
  // "e" + combining acute vs precomposed U+00E9
  EXPECT_EQ(normalize("Ce\xCC\x81line"), normalize("C\xC3\xA9line"));
  EXPECT_EQ(normalize("C\xC3\xA9line"), "c\xC3\xA9line");
}

TEST(Normalize, Idempotent) {
  for (const char* s : {"  A  *b*  C ", "\xE2\x80\x9CX\xE2\x80\x9D  y", "", "Review:\n\nThis paper"}) {
    const std::string once = normalize(s);
    EXPECT_EQ(normalize(once), once) << s;
  }
}

TEST(Normalize, LinesKeepStructure) {
  const auto lines = normalize_lines("Title: Foo\n\n  Review:  \nThis   Paper");
  ASSERT_EQ(lines.size(), 3u);
  EXPECT_EQ(lines[0], "title: foo");
  EXPECT_EQ(lines[1], "review:");
  EXPECT_EQ(lines[2], "this paper");
}

TEST(Normalize, WordTokens) {
  const auto t = word_tokens("Following Kunz et al. (2018), this paper");
  const std::vector<std::string> want{"following", "kunz", "et", "al", "2018", "this", "paper"};
  EXPECT_EQ(t, want);
}

}  // namespace
}  // namespace revmark
