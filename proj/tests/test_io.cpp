// Tests for the tab-separated readers and writers: round trips, strict
// validation with line-numbered errors, and the digest helper.
#include <catch2/catch_amalgamated.hpp>

#include "stmrf/evaluate.hpp"
#include "stmrf/inference.hpp"
#include "stmrf/io.hpp"
#include "stmrf/rng.hpp"

#include <cmath>
#include <sstream>

using namespace stmrf;

TEST_CASE("numbers print with six significant digits") {
    REQUIRE(format_num(0.5) == "0.5");
    REQUIRE(format_num(1234567.0) == "1.23457e+06");
    REQUIRE(format_num(0.000123456789) == "0.000123457");
    REQUIRE(format_num(-3.0) == "-3");
}

TEST_CASE("expression table round trip preserves shape, order, and values") {
    Rng rng(1);
    ExpressionData data(std::vector<std::string>{"gene_b", "gene_a"}, 3, 2, 3);
    for (std::size_t g = 0; g < 2; ++g)
        for (std::size_t t = 0; t < 3; ++t)
            for (std::size_t k = 0; k < 5; ++k) data.set(g, t, k, rng.gamma(3.0, 1.0));
    std::ostringstream out;
    save_expression(data, out);
    std::istringstream in(out.str());
    const ExpressionData back = load_expression(in);
    REQUIRE(back.gene_labels() == data.gene_labels());  // first-appearance order
    REQUIRE(back.time_count() == 3);
    REQUIRE(back.m() == 2);
    REQUIRE(back.n() == 3);
    for (std::size_t g = 0; g < 2; ++g)
        for (std::size_t t = 0; t < 3; ++t) {
            const std::span<const double> a = data.cell(g, t);
            const std::span<const double> b = back.cell(g, t);
            for (std::size_t k = 0; k < 5; ++k)
                REQUIRE(b[k] == Catch::Approx(a[k]).epsilon(1e-5));  // 6 sig digits
        }
}

TEST_CASE("expression reader rejects malformed input with line numbers") {
    const std::string good_header = "gene\ttime\tgroup\tsample\tvalue\n";
    {
        std::istringstream in("wrong\theader\n");
        REQUIRE_THROWS_WITH(load_expression(in),
                            Catch::Matchers::ContainsSubstring("line 1"));
    }
    {
        std::istringstream in(good_header + "g1\t0\t1\t1\tnot_a_number\n");
        REQUIRE_THROWS_WITH(load_expression(in),
                            Catch::Matchers::ContainsSubstring("line 2"));
    }
    {
        std::istringstream in(good_header + "g1\t0\t1\t1\t-4.0\n");
        REQUIRE_THROWS(load_expression(in));  // negative value
    }
    {
        std::istringstream in(good_header + "g1\t0\t3\t1\t1.0\n");
        REQUIRE_THROWS(load_expression(in));  // group outside {1, 2}
    }
    {
        std::istringstream in(good_header);
        REQUIRE_THROWS(load_expression(in));  // header only, no rows
    }
}

TEST_CASE("expression reader enforces rectangularity and uniqueness") {
    const std::string h = "gene\ttime\tgroup\tsample\tvalue\n";
    // duplicate (gene, time, group, sample)
    {
        std::istringstream in(h +
                              "g1\t0\t1\t1\t1.0\n"
                              "g1\t0\t1\t2\t1.0\n"
                              "g1\t0\t2\t1\t1.0\n"
                              "g1\t0\t2\t2\t1.0\n"
                              "g1\t0\t1\t1\t2.0\n");
        REQUIRE_THROWS_WITH(load_expression(in),
                            Catch::Matchers::ContainsSubstring("duplicate"));
    }
    // gene missing a time point
    {
        std::ostringstream rows;
        rows << h;
        for (int t = 0; t < 2; ++t)
            for (int grp = 1; grp <= 2; ++grp)
                rows << "g1\t" << t << '\t' << grp << "\t1\t1.0\n";
        // g2 appears only at t=0
        for (int grp = 1; grp <= 2; ++grp) rows << "g2\t0\t" << grp << "\t1\t1.0\n";
        std::istringstream in(rows.str());
        REQUIRE_THROWS(load_expression(in));
    }
    // blank lines and comments are tolerated
    {
        std::istringstream in(h +
                              "\n"
                              "# comment\n"
                              "g1\t0\t1\t1\t1.5\n"
                              "g1\t0\t1\t2\t2.5\n"
                              "g1\t0\t2\t1\t0.5\n"
                              "g1\t0\t2\t2\t1.25\n");
        const ExpressionData d = load_expression(in);
        REQUIRE(d.gene_count() == 1);
        REQUIRE(d.m() == 2);
        REQUIRE(d.n() == 2);
        REQUIRE(d.cell(0, 0)[0] == 1.5);
    }
}

TEST_CASE("state table round trip and validation") {
    StateMatrix x(3, 2);
    x.set(0, 0, 1);
    x.set(2, 1, 1);
    const std::vector<std::string> labels = {"a", "b", "c"};
    std::ostringstream out;
    save_states(x, labels, out);
    REQUIRE(out.str().substr(0, 11) == "gene\tt0\tt1\n");
    std::istringstream in(out.str());
    const LabeledStates back = load_states(in);
    REQUIRE(back.labels == labels);
    REQUIRE(back.states == x);

    std::istringstream bad1("gene\tt0\na\t2\n");
    REQUIRE_THROWS_WITH(load_states(bad1),
                        Catch::Matchers::ContainsSubstring("line 2"));
    std::istringstream bad2("gene\tt0\tt2\na\t0\t0\n");
    REQUIRE_THROWS(load_states(bad2));  // column must be t1
    std::istringstream bad3("gene\tt0\n");
    REQUIRE_THROWS(load_states(bad3));  // no rows
}

TEST_CASE("parameter and trace writers emit one labeled row per value") {
    const MRFParams phi{-1.5, 0.25, -0.75, 0.5, 1.25};
    const GGParams th{10.0, 0.9, 0.5};
    std::ostringstream out;
    save_params(phi, th, out);
    const std::string text = out.str();
    REQUIRE(text ==
            "gamma0\t-1.5\n"
            "beta0\t0.25\n"
            "gamma\t-0.75\n"
            "beta1\t0.5\n"
            "beta2\t1.25\n"
            "alpha\t10\n"
            "alpha0\t0.9\n"
            "nu\t0.5\n");

    CycleRecord rec;
    rec.phi = phi;
    rec.theta = th;
    rec.pseudolik = -123.456;
    rec.flips = 7;
    std::ostringstream tr;
    save_trace({rec}, tr);
    REQUIRE(tr.str().find("cycle\tgamma0") == 0);
    REQUIRE(tr.str().find("\t7\n") != std::string::npos);
}

TEST_CASE("metrics and aggregate writers match the documented layout") {
    TimepointMetrics m;
    m.t = 0;
    m.tp = 8;
    m.fp = 2;
    m.tn = 88;
    m.fn = 2;
    m.sensitivity = 0.8;
    m.specificity = 88.0 / 90.0;
    m.fdr = 0.2;
    std::ostringstream out;
    save_metrics({{m}}, out);
    const std::string text = out.str();
    REQUIRE(text.find("replicate\tt\tsen\tspe\tfdr\ttp\tfp\ttn\tfn") == 0);
    REQUIRE(text.find("0\t0\t0.8\t") != std::string::npos);

    AggregateRow row;
    row.t = 1;
    row.sen = {0.4, 0.3};
    row.spe = {0.9, 0.0};
    row.fdr = {0.3, 0.1};
    std::ostringstream agg;
    save_aggregate({row}, agg);
    REQUIRE(agg.str().find("t\tsen_mean\tsen_se\tspe_mean\tspe_se\tfdr_mean\tfdr_se") == 0);
    REQUIRE(agg.str().find("1\t0.4\t0.3\t0.9\t0\t0.3\t0.1") != std::string::npos);
}

TEST_CASE("digest helper is stable and content-sensitive") {
    // FNV-1a 64 has well-known reference values
    REQUIRE(fnv1a64("") == 0xcbf29ce484222325ULL);
    REQUIRE(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
    REQUIRE(fnv1a64("hello") != fnv1a64("hellp"));
}

TEST_CASE("file round trip and digest formatting") {
    const std::string path = "io_test_scratch.txt";
    write_file(path, "line one\nline two\n");
    REQUIRE(read_file(path) == "line one\nline two\n");
    const std::string d = file_digest(path);
    REQUIRE(d.substr(0, 8) == "fnv1a64:");
    REQUIRE(d.size() == 8 + 16);
    std::remove(path.c_str());
    REQUIRE_THROWS(read_file("definitely_missing_file.tsv"));
}
