#include <jumplab/panel.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

using namespace jumplab;

namespace {

std::filesystem::path write_temp(const std::string& name, const std::string& body) {
    const auto dir = std::filesystem::temp_directory_path() / "jumplab_panel_tests";
    std::filesystem::create_directories(dir);
    const auto p = dir / name;
    std::ofstream(p) << body;
    return p;
}

// Two days on a 09:30-16:00 five-minute grid; `skip` drops one interior row of day 2.
std::string two_day_csv(bool skip) {
    std::string s = "date,time,price\n";
    for (int d = 0; d < 2; ++d) {
        for (int i = 0; i < 79; ++i) {
            if (skip && d == 1 && i == 40) continue;
            const int mins = 9 * 60 + 30 + 5 * i;
            char buf[64];
            std::snprintf(buf, sizeof buf, "2024-01-0%d,%02d:%02d:00,%.4f\n", d + 2, mins / 60, mins % 60,
                          100.0 + 0.01 * i + d);
            s += buf;
        }
    }
    return s;
}

}  // namespace

TEST(Panel, ReturnsFromPrices) {
    const std::vector<double> flat{100, 100, 100, 100, 100};
    for (double r : returns_from_prices(flat)) EXPECT_EQ(r, 0.0);
    const std::vector<double> p{100, 101.005, 99.005, 99.005, 99.005};
    const auto r = returns_from_prices(p);
    ASSERT_EQ(r.size(), 4u);
    EXPECT_NEAR(r[0], 0.0100, 1e-4);
    EXPECT_NEAR(r[1], -0.0200, 1e-4);
    EXPECT_THROW(returns_from_prices(std::vector<double>{100, 0, 100, 100, 100}), DataError);
    EXPECT_THROW(returns_from_prices(std::vector<double>{100, 100, 100}), InsufficientData);
}

TEST(Panel, PriceRoundTrip) {
    const std::vector<double> p{100, 100.7, 99.1, 101.3, 101.2, 98.4};
    const auto r = returns_from_prices(p);
    double lp = std::log(p[0]);
    for (std::size_t i = 0; i < r.size(); ++i) {
        lp += r[i];
        EXPECT_NEAR(lp, std::log(p[i + 1]), 1e-12 * std::abs(std::log(p[i + 1])));
    }
}

TEST(Panel, Thin) {
    const std::vector<double> r{0.01, 0.01, 0.01, 0.01};
    const auto t = thin(r, 2);
    ASSERT_EQ(t.size(), 2u);
    EXPECT_DOUBLE_EQ(t[0], 0.02);
    EXPECT_DOUBLE_EQ(t[1], 0.02);
    EXPECT_THROW(thin(std::vector<double>(7, 0.0), 2), DomainError);

    std::vector<double> fine(720);
    for (std::size_t i = 0; i < fine.size(); ++i) fine[i] = 1e-3 * std::sin(0.37 * static_cast<double>(i));
    const auto five = thin(fine, 10);
    ASSERT_EQ(five.size(), 72u);
    double a = 0, b = 0;
    for (double x : fine) a += x;
    for (double x : five) b += x;
    EXPECT_NEAR(a, b, 1e-12);
}

TEST(Panel, DayInvariants) {
    EXPECT_THROW(IntradayDay(0, {0.1, 0.2, 0.3}), InsufficientData);
    EXPECT_THROW(IntradayDay(0, {0.1, NAN, 0.3, 0.1}), DataError);
    GroundTruth g;
    g.day_index = 5;
    EXPECT_THROW(IntradayDay(4, {0.1, 0.1, 0.1, 0.1}, g), DataError);
    EXPECT_NO_THROW(IntradayDay(5, {0.1, 0.1, 0.1, 0.1}, g));

    Panel panel;
    panel.push_back(IntradayDay(0, {0.1, 0.1, 0.1, 0.1}));
    EXPECT_THROW(panel.push_back(IntradayDay(0, {0.1, 0.1, 0.1, 0.1})), DataError);
    EXPECT_THROW(panel.push_back(IntradayDay(1, {0.1, 0.1, 0.1, 0.1, 0.1})), DataError);
}

TEST(Panel, LoadCsvStrict) {
    const auto p = write_temp("full.csv", two_day_csv(false));
    const auto res = load_intraday_csv(p.string(), 79);
    EXPECT_EQ(res.panel.T(), 2u);
    EXPECT_EQ(res.panel[0].M(), 78u);
    EXPECT_EQ(res.panel[1].label(), "2024-01-03");
    EXPECT_TRUE(res.warnings.empty());
}

TEST(Panel, LoadCsvMissingRowStrictNamesDate) {
    const auto p = write_temp("gap.csv", two_day_csv(true));
    try {
        load_intraday_csv(p.string(), 79);
        FAIL() << "expected DataError";
    } catch (const DataError& e) {
        EXPECT_NE(std::string(e.what()).find("2024-01-03"), std::string::npos);
    }
}

TEST(Panel, LoadCsvPadForward) {
    const auto p = write_temp("gap_pad.csv", two_day_csv(true));
    const auto res = load_intraday_csv(p.string(), 79, true);
    EXPECT_EQ(res.panel.T(), 2u);
    ASSERT_EQ(res.warnings.size(), 1u);
    EXPECT_NE(res.warnings[0].find("2024-01-03"), std::string::npos);
    EXPECT_EQ(res.panel[1].returns()[39], 0.0);  // carried price
}

TEST(Panel, LoadCsvRejectsBadInput) {
    EXPECT_THROW(load_intraday_csv(write_temp("hdr.csv", "day,time,price\n").string(), 79), DataError);
    EXPECT_THROW(load_intraday_csv(write_temp("neg.csv", "date,time,price\n2024-01-02,09:30:00,-1\n").string(), 79),
                 DataError);
    EXPECT_THROW(load_intraday_csv(write_temp("unsorted.csv",
                                              "date,time,price\n2024-01-02,09:35:00,1\n2024-01-02,09:30:00,1\n")
                                       .string(),
                                   79),
                 DataError);
    EXPECT_THROW(load_intraday_csv("/nonexistent/file.csv", 79), DataError);
}
