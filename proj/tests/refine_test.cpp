#include "support.hpp"

#include <wikisem/refine.hpp>
#include <wikisem/text.hpp>

#include <gtest/gtest.h>

using namespace wikisem;
using namespace wikisem::testing;

namespace {

std::vector<ViolationCode> codes(const std::vector<Violation>& vs) {
    std::vector<ViolationCode> out;
    for (const auto& v : vs) {
        out.push_back(v.code);
    }
    return out;
}

bool has(const std::vector<Violation>& vs, ViolationCode code) {
    const auto c = codes(vs);
    return std::find(c.begin(), c.end(), code) != c.end();
}

const LanguageProfile& en() {
    static const auto p = default_profile("en");
    return p;
}

EntityRecord entity(std::string id, std::string label, std::string title = {}) {
    EntityRecord r;
    r.id = EntityId(std::move(id));
    if (!label.empty()) {
        r.labels["en"] = std::move(label);
    }
    if (!title.empty()) {
        r.wiki_titles["en"] = std::move(title);
    }
    return r;
}

} // namespace

TEST(Text, DigitsAndCase) {
    EXPECT_EQ(text::strip_digits("January 2010"), "January ");
    EXPECT_EQ(text::strip_digits("１月２０１０年"), "月年");
    EXPECT_EQ(text::strip_digits("٣٤x"), "x");
    EXPECT_EQ(text::fold_case("Straße ÉTÉ"), "straße été");
    EXPECT_EQ(text::decode("日本").size(), 2u);
    EXPECT_EQ(text::encode(text::decode("çava 日本")), "çava 日本");
    EXPECT_TRUE(text::is_kana(U'か'));
    EXPECT_TRUE(text::is_kana(U'カ'));
    EXPECT_TRUE(text::is_kana(U'ー'));
    EXPECT_FALSE(text::is_kana(U'日'));
    EXPECT_EQ(text::normalize_title("Chicago_Bulls"), "Chicago Bulls");
    EXPECT_EQ(text::split_whitespace("  a  b\tc "), (std::vector<std::string_view>{"a", "b", "c"}));
}

TEST(AnchorIndex, SingleEntry) {
    const std::vector<AnchorEntry> es{{"a", "T", 5}};
    const auto idx = build_anchor_index(es, "en");
    ASSERT_TRUE(idx.find("T"));
    EXPECT_EQ(idx.find("T")->anchor, "a");
    EXPECT_DOUBLE_EQ(idx.find("T")->probability, 1.0);
}

TEST(AnchorIndex, HalfOfTheInlinks) {
    const std::vector<AnchorEntry> es{{"Man Utd", "Manchester_United_F.C.", 300},
                                      {"Manchester United", "Manchester_United_F.C.", 500},
                                      {"The Red Devils", "Manchester_United_F.C.", 200}};
    const auto idx = build_anchor_index(es, "en");
    const auto* w = idx.find("Manchester United F.C.");
    ASSERT_TRUE(w);
    EXPECT_EQ(w->anchor, "Manchester United");
    EXPECT_DOUBLE_EQ(w->probability, 0.5);
}

TEST(AnchorIndex, TiesGoToSmallestAnchor) {
    const std::vector<AnchorEntry> es{{"b", "T", 4}, {"a", "T", 4}, {"c", "T", 1}};
    EXPECT_EQ(build_anchor_index(es, "en").find("T")->anchor, "a");
}

TEST(AnchorIndex, RandomMatchesGroupingOracle) {
    std::mt19937_64 rng(59);
    std::vector<AnchorEntry> es;
    for (int i = 0; i < 5000; ++i) {
        es.push_back({"anchor" + std::to_string(rng() % 12), "T" + std::to_string(rng() % 150),
                      1 + rng() % 30});
    }
    const auto idx = build_anchor_index(es, "en");
    std::map<std::string, std::map<std::string, std::uint64_t>> counts;
    for (const auto& e : es) {
        counts[e.target_title][e.anchor] += e.count;
    }
    EXPECT_EQ(idx.size(), counts.size());
    for (const auto& [title, anchors] : counts) {
        std::uint64_t total = 0;
        std::pair<std::uint64_t, std::string> best{0, ""};
        for (const auto& [a, c] : anchors) {
            total += c;
            if (c > best.first) {
                best = {c, a};
            }
        }
        const auto* w = idx.find(title);
        ASSERT_TRUE(w);
        EXPECT_EQ(w->anchor, best.second);
        EXPECT_DOUBLE_EQ(w->probability, static_cast<double>(best.first) / total);
    }
}

TEST(ResolveSurface, AnchorThenLabel) {
    const auto g = build_graph({entity("Q18656", "Manchester United F.C.", "Manchester_United_F.C."),
                                entity("Q1", "Mordor"), entity("Q2", ""),
                                entity("Q3", "", "Nowhere")});
    const std::vector<AnchorEntry> es{{"Manchester United", "Manchester_United_F.C.", 500},
                                      {"Man Utd", "Manchester_United_F.C.", 300}};
    const auto idx = build_anchor_index(es, "en");
    EXPECT_EQ(resolve_surface(idx, g, EntityId("Q18656")), "Manchester United");
    EXPECT_EQ(resolve_surface(idx, g, EntityId("Q1")), "Mordor");
    EXPECT_THROW(resolve_surface(idx, g, EntityId("Q2")), UnresolvableEntityError);
    EXPECT_THROW(resolve_surface(idx, g, EntityId("Q3")), UnresolvableEntityError);
    EXPECT_THROW(resolve_surface(idx, g, EntityId("Q404")), UnknownEntityError);
}

TEST(ResolveSurface, HundredEntitiesMatchOracle) {
    std::mt19937_64 rng(61);
    std::vector<EntityRecord> rs;
    std::vector<AnchorEntry> es;
    for (int i = 0; i < 100; ++i) {
        const auto id = "Q" + std::to_string(i);
        rs.push_back(entity(id, rng() % 5 ? "label " + id : "", "Page_" + id));
        if (rng() % 3) {
            for (int k = 0, n = 1 + rng() % 4; k < n; ++k) {
                es.push_back({"a" + std::to_string(rng() % 6), "Page " + id, 1 + rng() % 9});
            }
        }
    }
    const auto g = build_graph(rs);
    const auto idx = build_anchor_index(es, "en");
    for (const auto& r : rs) {
        std::map<std::string, std::uint64_t> mine;
        for (const auto& e : es) {
            if (e.target_title == "Page " + r.id.str()) {
                mine[e.anchor] += e.count;
            }
        }
        std::optional<std::string> expected;
        std::uint64_t best = 0;
        for (const auto& [a, c] : mine) {
            if (c > best) {
                best = c;
                expected = a;
            }
        }
        if (!expected && r.labels.contains("en")) {
            expected = r.labels.at("en");
        }
        if (expected) {
            EXPECT_EQ(resolve_surface(idx, g, r.id), *expected);
        } else {
            EXPECT_THROW(resolve_surface(idx, g, r.id), UnresolvableEntityError);
        }
    }
}

TEST(RejectReasons, JanuaryYears) {
    const std::vector<std::string> c{"January 2010", "January 2012", "January 2014", "March",
                                     "April", "May", "June", "July"};
    EXPECT_TRUE(has(reject_reasons(c, en(), 7), ViolationCode::DigitDuplicates));
    // Exactly two collisions is allowed.
    const std::vector<std::string> two{"January 2010", "January 2012", "March", "April",
                                       "May", "June", "July"};
    EXPECT_TRUE(reject_reasons(two, en(), 7).empty());
}

TEST(RejectReasons, FullWidthDigitsCollide) {
    const std::vector<std::string> c{"２０１０年", "２０１１年", "１９９９年", "東京", "大阪", "名古屋",
                                     "札幌"};
    const auto vs = reject_reasons(c, default_profile("ja"), 7);
    EXPECT_TRUE(has(vs, ViolationCode::DigitDuplicates));
}

TEST(RejectReasons, FootballClubSuffix) {
    const std::vector<std::string> c{"Arsenal F.C.",   "Chelsea F.C.",       "Everton F.C.",
                                     "Fulham F.C.",    "Liverpool F.C.",     "Southampton F.C.",
                                     "Tottenham Hotspur", "Manchester United"};
    const auto vs = reject_reasons(c, en(), 7);
    ASSERT_TRUE(has(vs, ViolationCode::AffixOverlap));
    for (const auto& v : vs) {
        if (v.code == ViolationCode::AffixOverlap) {
            EXPECT_EQ(v.detail.size(), 6u);
        }
    }
}

TEST(RejectReasons, SixCharacterPrefix) {
    const std::vector<std::string> c{"Stadium One", "Stadium Two", "Stadium Three",
                                     "Stadium Four", "Arena", "Field", "Park"};
    auto p = default_profile("de");
    EXPECT_TRUE(has(reject_reasons(c, p, 7), ViolationCode::AffixOverlap));
    const std::vector<std::string> three{"Stadium One", "Stadium Two", "Stadium Three",
                                         "Dome", "Arena", "Field", "Park"};
    EXPECT_TRUE(reject_reasons(three, p, 7).empty());
}

TEST(RejectReasons, CategoryPrefix) {
    const std::vector<std::string> c{"Category:Physics", "gravity", "energy", "mass",
                                     "momentum", "force", "work"};
    const auto vs = reject_reasons(c, en(), 7);
    ASSERT_EQ(codes(vs), std::vector<ViolationCode>{ViolationCode::StopAffix});
    EXPECT_EQ(vs[0].detail, std::vector<std::string>{"Category:Physics"});
}

TEST(RejectReasons, SingleLetters) {
    const std::vector<std::string> c{"a", "b", "alpha", "beta", "gamma", "delta", "epsilon"};
    EXPECT_TRUE(has(reject_reasons(c, en(), 7), ViolationCode::SingleChar));
    const std::vector<std::string> one{"a", "bee", "alpha", "beta", "gamma", "delta", "epsilon"};
    EXPECT_FALSE(has(reject_reasons(one, en(), 7), ViolationCode::SingleChar));
    const std::vector<std::string> kanji{"火", "水", "木曜", "金曜", "土曜", "日曜", "月曜日"};
    EXPECT_FALSE(has(reject_reasons(kanji, default_profile("ja"), 7), ViolationCode::SingleChar));
}

TEST(RejectReasons, CleanClusters) {
    const std::vector<std::string> countries{"Mordor", "Rohan", "Shire", "Arnor",
                                             "Gondor", "Lindon", "Harad", "Rhûn"};
    EXPECT_TRUE(reject_reasons(countries, en(), 7).empty());
    const std::vector<std::string> emotions{"fear", "love", "happiness", "anger",
                                            "sadness", "disgust", "surprise", "shame"};
    EXPECT_TRUE(reject_reasons(emotions, en(), 7).empty());
}

TEST(RejectReasons, TooFewAfterDedup) {
    const std::vector<std::string> c{"a1", "b1", "c1", "a1", "d1", "b1", "e1"};
    const auto vs = reject_reasons(c, en(), 7);
    ASSERT_EQ(codes(vs), std::vector<ViolationCode>{ViolationCode::TooFewAfterDedup});
}

TEST(RejectReasons, CjkVariant) {
    const auto ja = default_profile("ja");
    // Six share a non-kana first character.
    const std::vector<std::string> first{"東京駅", "東北線", "東海道", "東山線", "東西線", "東横線",
                                         "大阪駅"};
    EXPECT_TRUE(has(reject_reasons(first, ja, 7), ViolationCode::AffixOverlap));
    // Five is not enough for the single-character rule.
    const std::vector<std::string> five{"東京駅", "東北線", "東海道", "東山線", "東西線", "大阪駅",
                                        "名古屋"};
    EXPECT_FALSE(has(reject_reasons(five, ja, 7), ViolationCode::AffixOverlap));
    // A kana boundary character is skipped.
    const std::vector<std::string> kana{"かばん", "かえる", "かめ", "かさ", "かに", "かき", "東京"};
    EXPECT_FALSE(has(reject_reasons(kana, ja, 7), ViolationCode::AffixOverlap));
    // More than three share the last two characters.
    const std::vector<std::string> pair{"山手線", "中央線", "総武線", "京浜線", "東京", "大阪",
                                        "京都"};
    EXPECT_FALSE(has(reject_reasons(pair, ja, 7), ViolationCode::AffixOverlap));
    const std::vector<std::string> pair4{"北大学", "南大学", "東大学", "西大学", "東京", "大阪",
                                         "京都"};
    EXPECT_TRUE(has(reject_reasons(pair4, ja, 7), ViolationCode::AffixOverlap));
    EXPECT_TRUE(has(reject_reasons(std::vector<std::string>{"一覧", "a", "b", "c", "d", "e", "f"},
                                   default_profile("zh"), 7) ,
                    ViolationCode::SingleChar) == false);
}

TEST(RejectReasons, PermutationInvariant) {
    std::mt19937_64 rng(67);
    const std::vector<std::string> pool{"January 2010", "January 2011", "January 2012", "a", "b",
                                        "Arsenal F.C.", "Chelsea F.C.", "Fulham F.C.",
                                        "Everton F.C.", "Category:X", "Mordor", "Rohan",
                                        "Shire", "Arnor", "Gondor"};
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<std::string> c;
        for (int i = 0; i < 8; ++i) {
            c.push_back(pool[rng() % pool.size()]);
        }
        auto before = reject_reasons(c, en(), 7);
        std::shuffle(c.begin(), c.end(), rng);
        auto after = reject_reasons(c, en(), 7);
        ASSERT_EQ(codes(before), codes(after));
        for (std::size_t i = 0; i < before.size(); ++i) {
            auto a = before[i].detail;
            auto b = after[i].detail;
            std::sort(a.begin(), a.end());
            std::sort(b.begin(), b.end());
            EXPECT_EQ(a, b);
        }
    }
}

TEST(LanguageProfile, Validation) {
    auto p = default_profile("en");
    EXPECT_NO_THROW(p.validate());
    p.affix_window = 0;
    EXPECT_THROW(p.validate(), std::invalid_argument);
    EXPECT_TRUE(default_profile("ja").cjk_mode);
    EXPECT_FALSE(default_profile("ja").single_char_filter_enabled);
    EXPECT_FALSE(default_profile("fr").cjk_mode);
}

namespace {

struct TableFixture {
    KnowledgeGraph graph;
    AnchorIndex index{"en"};
    RawGroup raw;

    TableFixture(const std::vector<std::string>& cluster, const std::vector<std::string>& outliers,
                 std::vector<AnchorEntry> anchors = {}) {
        std::vector<EntityRecord> rs{entity("C", "fictional country")};
        raw.class_id = EntityId("C");
        int i = 0;
        for (const auto& s : cluster) {
            rs.push_back(entity("I" + std::to_string(i), s, s));
            raw.cluster_ids.emplace_back("I" + std::to_string(i++));
        }
        const OutlierTier tiers[] = {OutlierTier::O1, OutlierTier::O1, OutlierTier::O2,
                                     OutlierTier::O2, OutlierTier::O3, OutlierTier::O3};
        int k = 0;
        for (const auto& s : outliers) {
            rs.push_back(entity("O" + std::to_string(k), s, s));
            raw.outlier_ids.emplace_back(tiers[k % 6], EntityId("O" + std::to_string(k)));
            ++k;
        }
        graph = build_graph(rs);
        index = build_anchor_index(anchors, "en");
    }
};

} // namespace

TEST(RefineGroup, FictionalCountryAccepted) {
    TableFixture f({"Mordor", "Rohan", "Shire", "Arnor", "Gondor", "Lindon", "Harad", "Rhûn"},
                   {"Thule", "Duat", "Donkey Kong", "Scrooge McDuck"});
    const auto out = refine_group(f.raw, f.index, f.graph, en(), {});
    ASSERT_TRUE(std::holds_alternative<DatasetRecord>(out));
    const auto& r = std::get<DatasetRecord>(out);
    EXPECT_EQ(r.class_label, "fictional country");
    EXPECT_EQ(r.cluster.front(), "Mordor");
    EXPECT_EQ(r.outliers.size(), 4u);
    EXPECT_EQ(r.outliers[2].surface, "Donkey Kong");
    EXPECT_EQ(r.outliers[2].tier, OutlierTier::O2);
    EXPECT_FALSE(check_record(r));
}

TEST(RefineGroup, CollapsesBelowMinimum) {
    TableFixture f({"A1", "B1", "C1", "D1", "E1", "F1", "G1"}, {"X"},
                   {{"Same", "A1", 5}, {"Same", "B1", 5}, {"Same", "C1", 5}});
    const auto out = refine_group(f.raw, f.index, f.graph, en(), {});
    ASSERT_TRUE(std::holds_alternative<RefineReject>(out));
    EXPECT_EQ(codes(std::get<RefineReject>(out).violations),
              std::vector<ViolationCode>{ViolationCode::TooFewAfterDedup});
}

TEST(RefineGroup, OutlierDuplicatesAndStopAffixesDropped) {
    TableFixture f({"Mordor", "Rohan", "Shire", "Arnor", "Gondor", "Lindon", "Harad"},
                   {"Mordor", "Thule", "Category:Maps", "Thule"});
    const auto out = refine_group(f.raw, f.index, f.graph, en(), {});
    ASSERT_TRUE(std::holds_alternative<DatasetRecord>(out));
    const auto& r = std::get<DatasetRecord>(out);
    ASSERT_EQ(r.outliers.size(), 1u);
    EXPECT_EQ(r.outliers[0].surface, "Thule");

    TableFixture none({"Mordor", "Rohan", "Shire", "Arnor", "Gondor", "Lindon", "Harad"},
                      {"Mordor"});
    const auto rejected = refine_group(none.raw, none.index, none.graph, en(), {});
    ASSERT_TRUE(std::holds_alternative<RefineReject>(rejected));
    EXPECT_TRUE(std::get<RefineReject>(rejected).no_outliers);
}

TEST(RefineGroup, FuzzedGroupsAlwaysValid) {
    std::mt19937_64 rng(71);
    const std::vector<std::string> vocab{"Mordor", "Rohan", "Shire", "Arnor", "Gondor", "Lindon",
                                         "Harad", "Rhûn", "Thule", "Duat", "Donkey Kong",
                                         "Scrooge McDuck", "a", "b", "Category:Z", "Year 2001",
                                         "Year 2002", "Year 2003", "東京", "List of things"};
    std::size_t accepted = 0;
    for (int trial = 0; trial < 500; ++trial) {
        std::vector<std::string> cluster;
        std::vector<std::string> outliers;
        for (int i = 0, n = 6 + rng() % 4; i < n; ++i) {
            cluster.push_back(vocab[rng() % vocab.size()]);
        }
        for (int i = 0, n = rng() % 7; i < n; ++i) {
            outliers.push_back(vocab[rng() % vocab.size()]);
        }
        TableFixture f(cluster, outliers);
        const auto out = refine_group(f.raw, f.index, f.graph, en(), {});
        if (const auto* r = std::get_if<DatasetRecord>(&out)) {
            ++accepted;
            EXPECT_FALSE(check_record(*r)) << *check_record(*r);
        }
    }
    EXPECT_GT(accepted, 20u);
}
