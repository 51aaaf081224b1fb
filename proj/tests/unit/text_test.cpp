#include "coterm/text.hpp"

#include <gtest/gtest.h>

using coterm::CaseMode;
using coterm::normalize_term;
using coterm::tokenize;
using Tokens = std::vector<std::string>;

TEST(Tokenize, HyphenSeparatesAndCaseFolds) {
  EXPECT_EQ(tokenize("Aspirin-induced pain", CaseMode::insensitive), (Tokens{"aspirin", "induced", "pain"}));
}

TEST(Tokenize, SensitiveModeKeepsCase) {
  EXPECT_EQ(tokenize("TP53 p53", CaseMode::sensitive), (Tokens{"TP53", "p53"}));
}

TEST(Tokenize, EmptyInput) {
  EXPECT_TRUE(tokenize("", CaseMode::sensitive).empty());
  EXPECT_TRUE(tokenize("", CaseMode::insensitive).empty());
  EXPECT_TRUE(tokenize(" ,.-;() ", CaseMode::insensitive).empty());
}

TEST(Tokenize, UnicodeLettersAndDigits) {
  EXPECT_EQ(tokenize("Ärzte—Straße 42nd", CaseMode::insensitive), (Tokens{"ärzte", "straße", "42nd"}));
  EXPECT_EQ(tokenize("ΑΣΠΙΡΊΝΗ", CaseMode::insensitive), (Tokens{"ασπιρίνη"}));
  EXPECT_EQ(tokenize("ΑΣΠΙΡΊΝΗ", CaseMode::sensitive), (Tokens{"ΑΣΠΙΡΊΝΗ"}));
  EXPECT_EQ(tokenize("数据 挖掘", CaseMode::sensitive), (Tokens{"数据", "挖掘"}));
}

TEST(Tokenize, MalformedBytesSeparate) {
  const std::string text = std::string("ab") + '\xff' + "cd";
  EXPECT_EQ(tokenize(text, CaseMode::sensitive), (Tokens{"ab", "cd"}));
}

TEST(Tokenize, BufferReuseClearsPreviousTokens) {
  coterm::TokenBuffer buffer;
  coterm::tokenize_into("one two three", CaseMode::sensitive, buffer);
  EXPECT_EQ(buffer.size(), 3u);
  coterm::tokenize_into("four", CaseMode::sensitive, buffer);
  ASSERT_EQ(buffer.size(), 1u);
  EXPECT_EQ(buffer.at(0), "four");
}

TEST(NormalizeTerm, JoinsTokensWithSingleSpaces) {
  EXPECT_EQ(normalize_term("  Aspirin ", CaseMode::insensitive), "aspirin");
  EXPECT_EQ(normalize_term("Cancer--Therapy", CaseMode::insensitive), "cancer therapy");
  EXPECT_EQ(normalize_term("Cancer  Therapy", CaseMode::sensitive), "Cancer Therapy");
  EXPECT_EQ(normalize_term("---", CaseMode::sensitive), "");
}

TEST(CaseModeNames, RoundTrip) {
  for (auto mode : {CaseMode::sensitive, CaseMode::insensitive}) {
    EXPECT_EQ(coterm::parse_case_mode(coterm::to_string(mode)), mode);
  }
  EXPECT_FALSE(coterm::parse_case_mode("Sensitive").has_value());
}

TEST(Utf8Validation, FindsFirstBadByte) {
  EXPECT_FALSE(coterm::find_invalid_utf8("plain ascii").has_value());
  EXPECT_FALSE(coterm::find_invalid_utf8("Straße").has_value());
  EXPECT_EQ(coterm::find_invalid_utf8(std::string("ok") + '\xc3'), 2u);
  EXPECT_EQ(coterm::find_invalid_utf8(std::string("a") + '\xed' + '\xa0' + '\x80'), 1u);  // surrogate
}
