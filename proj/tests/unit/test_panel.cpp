#include "anomalyscan/errors.hpp"
#include "anomalyscan/panel.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace anomalyscan;

namespace {

MonthlyPanel parse(const std::string& text, LoadReport* report = nullptr) {
    std::istringstream in(text);
    return parse_monthly_panel(in, {}, report, "mem.csv");
}

template <class F>
std::string error_of(F&& f) {
    try {
        f();
    } catch (const ValidationError& e) {
        return e.what();
    }
    return {};
}

} // namespace

TEST(MonthKey, ArithmeticCrossesYearBoundaries) {
    const MonthKey m(1999, 11);
    EXPECT_EQ((m + 3).to_string(), "2000-02");
    EXPECT_EQ((m - 23).to_string(), "1997-12");
    EXPECT_EQ((m + 1200) - m, 1200);
    EXPECT_EQ((m + 14).year(), 2001);
    EXPECT_EQ((m + 14).month(), 1);
    EXPECT_LT(MonthKey(1999, 12), MonthKey(2000, 1));
    EXPECT_THROW(MonthKey(2000, 13), ValidationError);
}

TEST(MonthKey, RoundTripsOverLongSpans) {
    for (int k = -500; k <= 500; k += 7) {
        const MonthKey m = MonthKey(1990, 6) + k;
        EXPECT_EQ(MonthKey(m.year(), m.month()), m);
        EXPECT_EQ((m + 5) - 5, m);
    }
}

TEST(MonthlyPanel, ParsesWellFormedFile) {
    const auto p = parse("stock,year,month,return\n"
                         "S1,2001,1,0.01\nS2,2001,1,0.02\nS3,2001,1,0.03\n"
                         "S1,2001,2,0.01\nS2,2001,2,0.02\nS3,2001,2,0.03\n"
                         "S1,2001,3,0.01\nS2,2001,3,0.02\nS3,2001,3,0.03\n"
                         "S1,2001,4,0.01\nS2,2001,4,-0.5\nS3,2001,4,0.03\n");
    EXPECT_EQ(p.n_months(), 4u);
    EXPECT_EQ(p.n_stocks(), 3u);
    EXPECT_EQ(p.first_month(), MonthKey(2001, 1));
    EXPECT_EQ(p.at(3, 1), -0.5);
}

TEST(MonthlyPanel, DuplicateCellNamesStockAndMonth) {
    const auto msg = error_of([] {
        parse("stock,year,month,return\nS1,2001,3,0.01\nS1,2001,3,0.02\n");
    });
    EXPECT_NE(msg.find("S1/2001-03"), std::string::npos) << msg;
    EXPECT_NE(msg.find("mem.csv:3"), std::string::npos) << msg;
}

TEST(MonthlyPanel, DropsStockWithOnlyMissingCells) {
    LoadReport report;
    const auto p = parse("stock,year,month,return\n"
                         "S1,2001,1,0.01\nS2,2001,1,NA\nS3,2001,1,0.03\n"
                         "S1,2001,2,0.02\nS2,2001,2,\nS3,2001,2,0.04\n",
                         &report);
    // Count distinct stocks that carry at least one numeric value.
    EXPECT_EQ(p.n_stocks(), 2u);
    EXPECT_EQ(p.stocks(), (std::vector<std::string>{"S1", "S3"}));
    ASSERT_EQ(report.dropped_stocks.size(), 1u);
    EXPECT_EQ(report.dropped_stocks[0], "S2");
    EXPECT_EQ(report.warnings.size(), 1u);
}

TEST(MonthlyPanel, MissingCellsAreNaNAndGapsFilled) {
    const auto p = parse("stock,year,month,return\nS1,2001,1,0.01\nS1,2001,4,0.02\nS2,2001,2,0.03\n");
    EXPECT_EQ(p.n_months(), 4u);
    EXPECT_TRUE(MonthlyPanel::missing(p.at(1, 0)));
    EXPECT_TRUE(MonthlyPanel::missing(p.at(2, 0)));
    EXPECT_EQ(p.at(1, 1), 0.03);
}

TEST(MonthlyPanel, RejectsReturnAtOrBelowMinusOne) {
    EXPECT_THROW(parse("stock,year,month,return\nS1,2001,1,-1\n"), ValidationError);
    EXPECT_THROW(parse("stock,year,month,return\nS1,2001,1,abc\n"), ValidationError);
    EXPECT_THROW(parse("stock,month,year,return\nS1,2001,1,0.1\n"), ValidationError);
}

TEST(MonthlyPanel, WriteParseRoundTripIsExact) {
    std::vector<double> r{0.1, kMissing, 1.0 / 3.0, -0.123456789012345678, 5e-300, 0.0};
    const MonthlyPanel p(MonthKey(2010, 11), 3, {"A", "B"}, r);
    std::ostringstream out;
    write_monthly_panel(out, p);
    std::istringstream in(out.str());
    IngestConfig cfg;
    cfg.drop_empty_stocks = false;
    EXPECT_EQ(parse_monthly_panel(in, cfg), p);
}

TEST(MonthlyPanel, SliceClampsToAxis) {
    const MonthlyPanel p(MonthKey(2000, 1), 4, {"A"}, {0.1, 0.2, 0.3, 0.4});
    const auto s = p.slice(MonthKey(1999, 1), MonthKey(2000, 2));
    EXPECT_EQ(s.n_months(), 2u);
    EXPECT_EQ(s.at(1, 0), 0.2);
    EXPECT_THROW(p.slice(MonthKey(2001, 1), MonthKey(2002, 1)), ValidationError);
}

TEST(DailyBars, ParsesAndValidates) {
    std::istringstream ok("stock,date,return,volume\nS1,2001-01-02,0.01,100\nS1,2001-01-03,-0.02,250\n");
    const auto bars = parse_daily_bars(ok);
    ASSERT_EQ(bars.stocks().size(), 1u);
    EXPECT_EQ(bars.bar_count(), 2u);
    EXPECT_EQ(bars.stocks()[0].bars[1].volume, 250.0);

    std::istringstream unordered("stock,date,return,volume\nS1,2001-01-03,0.01,100\nS1,2001-01-02,0.01,100\n");
    EXPECT_THROW(parse_daily_bars(unordered), ValidationError);
    std::istringstream negative("stock,date,return,volume\nS1,2001-01-03,0.01,-5\n");
    EXPECT_THROW(parse_daily_bars(negative), ValidationError);
    std::istringstream bad_date("stock,date,return,volume\nS1,2001/01/03,0.01,5\n");
    EXPECT_THROW(parse_daily_bars(bad_date), ValidationError);
}

TEST(Factors, ParsesOptionalColumnsAndRequiresConsecutiveMonths) {
    std::istringstream in("year,month,mkt,smb,hml,macro_index\n2000,12,0.01,0.0,0.0,100\n2001,1,0.02,0.1,-0.1,101\n");
    const auto f = parse_factors(in);
    EXPECT_EQ(f.n_months(), 2u);
    EXPECT_FALSE(f.index_logret.has_value());
    ASSERT_TRUE(f.macro_index.has_value());
    EXPECT_EQ((*f.macro_index)[1], 101.0);

    std::istringstream gap("year,month,mkt,smb,hml\n2000,1,0,0,0\n2000,3,0,0,0\n");
    EXPECT_THROW(parse_factors(gap), ValidationError);
    std::istringstream level("year,month,mkt,smb,hml,macro_index\n2000,1,0,0,0,0\n");
    EXPECT_THROW(parse_factors(level), ValidationError);
}

TEST(Align, IntersectsMonthAxes) {
    const std::size_t t = 132; // 1990-01 .. 2000-12
    std::vector<double> r(t, 0.01);
    const MonthlyPanel panel(MonthKey(1990, 1), t, {"A"}, r);
    FactorSeries f;
    f.first_month = MonthKey(1995, 1);
    f.mkt.assign(132, 0.0);
    f.smb.assign(132, 0.0);
    f.hml.assign(132, 0.0);
    const auto a = align_months(panel, f);
    EXPECT_EQ(a.panel.first_month(), MonthKey(1995, 1));
    EXPECT_EQ(a.panel.last_month(), MonthKey(2000, 12));
    EXPECT_EQ(a.factors.first_month, MonthKey(1995, 1));
    EXPECT_EQ(a.factors.last_month(), MonthKey(2000, 12));

    f.first_month = MonthKey(1990, 1);
    const auto same = align_months(panel, f);
    EXPECT_EQ(same.panel, panel);
    EXPECT_EQ(same.factors, f);

    f.first_month = MonthKey(2010, 1);
    EXPECT_THROW(align_months(panel, f), ValidationError);
}

TEST(Loaders, MissingFileMessageNamesPath) {
    const auto msg = error_of([] { load_monthly_panel("/nonexistent/panel.csv"); });
    EXPECT_NE(msg.find("/nonexistent/panel.csv"), std::string::npos);
}
