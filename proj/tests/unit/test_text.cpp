#include <gtest/gtest.h>

#include "fsmem/text.hpp"

using namespace fsmem;

TEST(Text, LengthCountsCodePoints) {
    EXPECT_EQ(text::length("abc"), 3u);
    EXPECT_EQ(text::length("\xe4\xb8\xad\xe6\x96\x87"), 2u); // two CJK characters
    EXPECT_EQ(text::length(""), 0u);
}

TEST(Text, TruncateAppendsMarkerOnlyWhenCut) {
    EXPECT_EQ(text::truncate("short", 10), "short");
    const std::string long_text(1000, 'x');
    const auto cut = text::truncate(long_text, 800);
    EXPECT_EQ(cut, std::string(800, 'x') + " [...]");
}

TEST(Text, TruncateNeverSplitsACodePoint) {
    std::string s;
    for (int i = 0; i < 10; ++i) s += "\xc3\xa9"; // e-acute
    const auto cut = text::truncate(s, 3, "");
    EXPECT_EQ(cut, "\xc3\xa9\xc3\xa9\xc3\xa9");
}

TEST(Text, MiddleTruncateTo40) {
    const std::string name = "reports/quarterly/2024/q3/drafts/summary_of_findings_v12.md";
    ASSERT_EQ(name.size(), 59u);
    const std::string sixty = name + "x";
    const auto t = text::middle_truncate(sixty, 40);
    EXPECT_EQ(text::length(t), 40u);
    EXPECT_NE(t.find("..."), std::string::npos);
    EXPECT_EQ(t.substr(0, 10), sixty.substr(0, 10));
    EXPECT_EQ(t.substr(t.size() - 10), sixty.substr(sixty.size() - 10));
    EXPECT_EQ(text::middle_truncate("short.md", 40), "short.md");
}

TEST(Text, ChunkIsLossless) {
    const std::string s(1700, 'a');
    const auto parts = text::chunk(s, 800);
    ASSERT_EQ(parts.size(), 3u);
    EXPECT_EQ(parts[0].size(), 800u);
    EXPECT_EQ(parts[1].size(), 800u);
    EXPECT_EQ(parts[2].size(), 100u);
    EXPECT_EQ(parts[0] + parts[1] + parts[2], s);
    EXPECT_TRUE(text::chunk("", 800).empty());
}

TEST(Text, TokenizeLowercasesAlphanumericRuns) {
    const auto t = text::tokenize("Hello, World! file_v2.md");
    const std::vector<std::string> want{"hello", "world", "file", "v2", "md"};
    EXPECT_EQ(t, want);
}

TEST(Text, TrimAndSplit) {
    EXPECT_EQ(text::trim("  a b \t\n"), "a b");
    const auto lines = text::split_lines("a\nb\r\nc");
    ASSERT_EQ(lines.size(), 3u);
    EXPECT_EQ(lines[2], "c");
}

TEST(Text, FixedIsLocaleIndependent) {
    EXPECT_EQ(text::fixed(1.5, 3), "1.500");
    EXPECT_EQ(text::fixed(-0.25, 2), "-0.25");
}
