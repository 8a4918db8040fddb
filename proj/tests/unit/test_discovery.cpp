#include <gtest/gtest.h>

#include <zlib.h>

#include "loopback.hpp"
#include "mementomap/discovery.hpp"
#include "mementomap/error.hpp"
#include "synthetic.hpp"

namespace mm = mementomap;
using mm::DiscoveryMethod;
using mm::testing::LoopbackServer;

namespace {

mm::MementoMapDocument sample_document(std::size_t records) {
  mm::testing::Rng rng(99);
  mm::testing::ArchiveShape shape;
  shape.keys = records;
  const auto keys = mm::testing::zipf_archive_keys(rng, shape);
  mm::StringLineSource src(mm::testing::document_text(mm::testing::baseline_records(rng, keys)));
  return mm::read_document(src);
}

std::string document_string(const mm::MementoMapDocument& doc) {
  mm::StringSink sink;
  mm::write_document(doc.headers, doc.records, sink);
  return sink.take();
}

std::string gzip(const std::string& data) {
  z_stream zs{};
  deflateInit2(&zs, Z_DEFAULT_COMPRESSION, Z_DEFLATED, 31, 8, Z_DEFAULT_STRATEGY);
  std::string out(deflateBound(&zs, data.size()) + 32, '\0');
  zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(data.data()));
  zs.avail_in = static_cast<uInt>(data.size());
  zs.next_out = reinterpret_cast<Bytef*>(out.data());
  zs.avail_out = static_cast<uInt>(out.size());
  deflate(&zs, Z_FINISH);
  out.resize(zs.total_out);
  deflateEnd(&zs);
  return out;
}

// Serves `pages` at /mm/<i>.ukvs; page 0 is also the well-known resource.
void serve_pages(LoopbackServer& s, std::vector<std::string> pages, bool link_headers = false) {
  auto shared = std::make_shared<std::vector<std::string>>(std::move(pages));
  auto handler = [shared, link_headers](std::size_t i, httplib::Response& res) {
    res.set_content((*shared)[i], "text/plain");
    if (link_headers && i + 1 < shared->size()) {
      res.set_header("Link", "</mm/" + std::to_string(i + 1) + ".ukvs>; rel=\"next\"");
    }
  };
  s.server().Get("/.well-known/mementomap",
                 [handler](const httplib::Request&, httplib::Response& res) { handler(0, res); });
  s.server().Get(R"(/mm/(\d+)\.ukvs)", [handler, shared](const httplib::Request& req,
                                                       httplib::Response& res) {
    const auto i = std::stoul(req.matches[1]);
    if (i >= shared->size()) {
      res.status = 404;
      return;
    }
    handler(i, res);
  });
}

mm::DiscoverySource source_at(const std::string& uri) {
  return {uri, uri, DiscoveryMethod::WellKnown, std::nullopt};
}

mm::ErrorKind fetch_error(const mm::DiscoverySource& src, const mm::FetchOptions& opts = {},
                          int* status = nullptr) {
  mm::StringSink sink;
  try {
    mm::fetch_mementomap(src, sink, opts);
  } catch (const mm::Error& e) {
    if (status) *status = e.status();
    return e.kind();
  }
  ADD_FAILURE() << "fetch succeeded";
  return mm::ErrorKind::InvalidArgument;
}

}  // namespace

TEST(WellKnownUri, IsAuthorityRooted) {
  EXPECT_EQ(mm::well_known_uri("https://archive.example.org/"),
            "https://archive.example.org/.well-known/mementomap");
  EXPECT_EQ(mm::well_known_uri("https://a.org/wayback/"), "https://a.org/.well-known/mementomap");
  EXPECT_EQ(mm::well_known_uri("http://a.org:8080/x?y#z"),
            "http://a.org:8080/.well-known/mementomap");
  EXPECT_EQ(mm::well_known_uri(mm::well_known_uri("https://a.org/wayback/")),
            "https://a.org/.well-known/mementomap");
  EXPECT_THROW(mm::well_known_uri("/relative"), mm::Error);
  EXPECT_THROW(mm::well_known_uri("ftp://a.org/"), mm::Error);
}

struct ResolveCase {
  const char* ref;
  const char* target;
};

class ResolveUri : public ::testing::TestWithParam<ResolveCase> {};

TEST_P(ResolveUri, ReferenceResolutionExamples) {
  EXPECT_EQ(mm::resolve_uri("http://a/b/c/d;p?q", GetParam().ref), GetParam().target)
      << GetParam().ref;
}

INSTANTIATE_TEST_SUITE_P(
    Rfc3986, ResolveUri,
    ::testing::Values(
        ResolveCase{"g:h", "g:h"}, ResolveCase{"g", "http://a/b/c/g"},
        ResolveCase{"./g", "http://a/b/c/g"}, ResolveCase{"g/", "http://a/b/c/g/"},
        ResolveCase{"/g", "http://a/g"}, ResolveCase{"//g", "http://g"},
        ResolveCase{"?y", "http://a/b/c/d;p?y"}, ResolveCase{"g?y", "http://a/b/c/g?y"},
        ResolveCase{"#s", "http://a/b/c/d;p?q#s"}, ResolveCase{"g#s", "http://a/b/c/g#s"},
        ResolveCase{"g?y#s", "http://a/b/c/g?y#s"}, ResolveCase{";x", "http://a/b/c/;x"},
        ResolveCase{"g;x", "http://a/b/c/g;x"}, ResolveCase{"g;x?y#s", "http://a/b/c/g;x?y#s"},
        ResolveCase{"", "http://a/b/c/d;p?q"}, ResolveCase{".", "http://a/b/c/"},
        ResolveCase{"./", "http://a/b/c/"}, ResolveCase{"..", "http://a/b/"},
        ResolveCase{"../", "http://a/b/"}, ResolveCase{"../g", "http://a/b/g"},
        ResolveCase{"../..", "http://a/"}, ResolveCase{"../../", "http://a/"},
        ResolveCase{"../../g", "http://a/g"}, ResolveCase{"../../../g", "http://a/g"},
        ResolveCase{"../../../../g", "http://a/g"}, ResolveCase{"/./g", "http://a/g"},
        ResolveCase{"/../g", "http://a/g"}, ResolveCase{"g.", "http://a/b/c/g."},
        ResolveCase{".g", "http://a/b/c/.g"}, ResolveCase{"g..", "http://a/b/c/g.."},
        ResolveCase{"..g", "http://a/b/c/..g"}, ResolveCase{"./../g", "http://a/b/g"},
        ResolveCase{"./g/.", "http://a/b/c/g/"}, ResolveCase{"g/./h", "http://a/b/c/g/h"},
        ResolveCase{"g/../h", "http://a/b/c/h"}, ResolveCase{"g;x=1/./y", "http://a/b/c/g;x=1/y"},
        ResolveCase{"g;x=1/../y", "http://a/b/c/y"}, ResolveCase{"g?y/./x", "http://a/b/c/g?y/./x"},
        ResolveCase{"g#s/../x", "http://a/b/c/g#s/../x"}, ResolveCase{"http:g", "http:g"}));

TEST(LinkHeader, SingleMementomapLink) {
  const auto found = mm::extract_link_relation("<https://a.org/mm.ukvs>; rel=\"mementomap\"");
  ASSERT_EQ(found.size(), 1u);
  EXPECT_EQ(found[0].resolved_map_uri, "https://a.org/mm.ukvs");
  EXPECT_EQ(found[0].method, DiscoveryMethod::LinkHeader);
  EXPECT_FALSE(found[0].anchor);
}

TEST(LinkHeader, OtherRelationsAreIgnored) {
  EXPECT_TRUE(mm::extract_link_relation("<https://a.org/x>; rel=\"timemap\"").empty());
  EXPECT_TRUE(mm::extract_link_relation("<https://a.org/x>").empty());
}

TEST(LinkHeader, AnchorAndRelListsAndRelativeTargets) {
  const auto found = mm::parse_link_header(
      "<https://t.org/x>; rel=\"first, odd\", "
      "</maps/other.ukvs>; rel=\"alternate MementoMap\"; anchor=\"https://other.archive/\", "
      "<mm.ukvs>; REL=mementomap",
      "https://host.example/base/page");
  ASSERT_EQ(found.size(), 2u);
  EXPECT_EQ(found[0].resolved_map_uri, "https://host.example/maps/other.ukvs");
  EXPECT_EQ(found[0].anchor, "https://other.archive/");
  EXPECT_EQ(found[1].resolved_map_uri, "https://host.example/base/mm.ukvs");
}

TEST(LinkHeader, MalformedAndUnresolvableLinksAreSkippedWithDiagnostics) {
  std::vector<std::string> diagnostics;
  const auto found = mm::parse_link_header(
      "<relative.ukvs>; rel=mementomap, garbage; rel=mementomap, <https://ok.org/m>; "
      "rel=\"mementomap\"",
      {}, &diagnostics);
  ASSERT_EQ(found.size(), 1u);
  EXPECT_EQ(found[0].resolved_map_uri, "https://ok.org/m");
  EXPECT_GE(diagnostics.size(), 2u);
}

TEST(HtmlLinks, CaseInsensitiveAttributes) {
  const std::string html =
      "<!doctype html><html><head><title>x</title>\n"
      "<LINK REL=\"stylesheet\" HREF=\"/s.css\">\n"
      "<link href='/mm.ukvs' rel='mementomap'>\n"
      "<link rel=mementomap href=https://third.party/m.ukvs anchor=\"https://a.org/\">\n"
      "</head></html>";
  const auto found = mm::extract_link_relation(html, "https://a.org/wayback/");
  ASSERT_EQ(found.size(), 2u);
  EXPECT_EQ(found[0].method, DiscoveryMethod::HtmlLink);
  EXPECT_EQ(found[0].resolved_map_uri, "https://a.org/mm.ukvs");
  EXPECT_EQ(found[1].resolved_map_uri, "https://third.party/m.ukvs");
  EXPECT_EQ(found[1].anchor, "https://a.org/");
}

TEST(Pagination, NextLinksAndMeta) {
  EXPECT_EQ(mm::next_links("</p/2>; rel=\"next\", </p/0>; rel=prev", "http://h/p/1"),
            (std::vector<std::string>{"http://h/p/2"}));
  EXPECT_EQ(mm::meta_next({"meta", "{next: \"http://h/2\"}"}), "http://h/2");
  EXPECT_EQ(mm::meta_next({"meta", "{\"next\": \"2.ukvs\"}"}), "2.ukvs");
  EXPECT_FALSE(mm::meta_next({"meta", "{type: \"MementoMap\"}"}));
  EXPECT_FALSE(mm::meta_next({"id", "{next: \"x\"}"}));
}

TEST(Pagination, PagesRepeatHeadersAndChainNext) {
  const auto doc = sample_document(25);
  const auto pages =
      mm::paginate_document(doc, 10, [](std::size_t i) { return "p" + std::to_string(i); });
  ASSERT_EQ(pages.size(), 3u);
  std::size_t records = 0;
  for (std::size_t i = 0; i < pages.size(); ++i) {
    mm::StringLineSource src(pages[i]);
    const auto page = mm::read_document(src);
    records += page.records.size();
    const bool last = i + 1 == pages.size();
    EXPECT_EQ(page.headers.size(), doc.headers.size() + (last ? 0 : 1));
    if (!last) EXPECT_EQ(mm::meta_next(page.headers.back()), "p" + std::to_string(i + 1));
  }
  EXPECT_EQ(records, doc.records.size());
  EXPECT_THROW(mm::paginate_document(doc, 0, [](std::size_t) { return ""; }), mm::Error);
}

TEST(Gunzip, RoundTripAndCorruption) {
  const std::string text = "a)/ 1\nb)/ 2\n";
  EXPECT_EQ(mm::gunzip(gzip(text)), text);
  std::string bad = gzip(text);
  bad.resize(bad.size() / 2);
  EXPECT_THROW(mm::gunzip(bad), mm::Error);
}

TEST(Fetch, ThreePagesViaMetaNext) {
  const auto doc = sample_document(3000);
  LoopbackServer s;
  // Relative next URIs resolve against the page URI, so the port is not needed.
  const auto pages = mm::paginate_document(doc, 1000, [](std::size_t i) {
    return "/mm/" + std::to_string(i) + ".ukvs";
  });
  ASSERT_EQ(pages.size(), 3u);
  serve_pages(s, pages);
  s.start();

  const auto src = mm::discover(s.url("/"));
  EXPECT_EQ(src.method, DiscoveryMethod::WellKnown);
  EXPECT_EQ(src.resolved_map_uri, s.url("/.well-known/mementomap"));
  mm::StringSink sink;
  const auto report = mm::fetch_mementomap(src, sink);
  EXPECT_EQ(report.pages, 3u);
  EXPECT_EQ(report.records, doc.records.size());
  EXPECT_EQ(report.page_uris.back(), s.url("/mm/2.ukvs"));
  EXPECT_EQ(sink.str(), document_string(doc));
  EXPECT_EQ(report.bytes, sink.str().size());
  mm::StringLineSource again(sink.str());
  EXPECT_NO_THROW(mm::read_document(again, mm::ParseMode::Strict));
}

TEST(Fetch, LinkHeaderPaginationAndGzipBodies) {
  const auto doc = sample_document(900);
  std::vector<std::string> pages;
  const std::size_t per = 300;
  for (std::size_t p = 0; p * per < doc.records.size(); ++p) {
    mm::StringSink sink;
    mm::DocumentWriter w(sink);
    w.headers(doc.headers);
    for (std::size_t i = p * per; i < std::min(doc.records.size(), (p + 1) * per); ++i) {
      w.record(doc.records[i]);
    }
    pages.push_back(p == 1 ? gzip(sink.str()) : sink.str());
  }
  LoopbackServer s;
  serve_pages(s, pages, /*link_headers=*/true);
  s.start();
  mm::StringSink sink;
  const auto report = mm::fetch_mementomap(source_at(s.url("/mm/0.ukvs")), sink);
  EXPECT_EQ(report.pages, pages.size());
  EXPECT_EQ(sink.str(), document_string(doc));
}

TEST(Fetch, Failures) {
  const auto doc = sample_document(300);
  LoopbackServer s;
  auto pages = mm::paginate_document(doc, 100, [](std::size_t i) {
    return "/mm/" + std::to_string(i) + ".ukvs";
  });
  serve_pages(s, pages);
  s.server().Get("/swapped/0.ukvs", [&](const httplib::Request&, httplib::Response& res) {
    res.set_content("!meta {next: \"/swapped/1.ukvs\"}\nz)/ 1\n", "text/plain");
  });
  s.server().Get("/swapped/1.ukvs", [&](const httplib::Request&, httplib::Response& res) {
    res.set_content("a)/ 1\n", "text/plain");
  });
  s.server().Get("/loop.ukvs", [&](const httplib::Request&, httplib::Response& res) {
    res.set_content("!meta {next: \"/loop.ukvs\"}\na)/ 1\n", "text/plain");
  });
  s.server().Get("/moved", [&](const httplib::Request&, httplib::Response& res) {
    res.set_redirect("/mm/2.ukvs");
  });
  s.start();

  int status = 0;
  EXPECT_EQ(fetch_error(source_at(s.url("/missing.ukvs")), {}, &status),
            mm::ErrorKind::HttpFailure);
  EXPECT_EQ(status, 404);
  mm::FetchOptions capped;
  capped.page_cap = 2;
  EXPECT_EQ(fetch_error(source_at(s.url("/mm/0.ukvs")), capped), mm::ErrorKind::TooManyPages);
  EXPECT_EQ(fetch_error(source_at(s.url("/swapped/0.ukvs"))), mm::ErrorKind::InvalidDocument);
  EXPECT_EQ(fetch_error(source_at(s.url("/loop.ukvs"))), mm::ErrorKind::InvalidDocument);

  mm::StringSink sink;
  const auto r = mm::fetch_mementomap(source_at(s.url("/moved")), sink);
  EXPECT_EQ(r.pages, 1u);
  EXPECT_EQ(r.page_uris[0], s.url("/mm/2.ukvs"));
}

TEST(Discover, FallsBackToLinkHeaderThenHtml) {
  LoopbackServer link_site;
  link_site.server().Get("/", [](const httplib::Request&, httplib::Response& res) {
    res.set_header("Link", "</maps/m.ukvs>; rel=\"mementomap\"");
    res.set_content("<html></html>", "text/html");
  });
  link_site.start();
  auto src = mm::discover(link_site.url("/"));
  EXPECT_EQ(src.method, DiscoveryMethod::LinkHeader);
  EXPECT_EQ(src.resolved_map_uri, link_site.url("/maps/m.ukvs"));
  EXPECT_EQ(src.archive_base, link_site.url("/"));

  LoopbackServer html_site;
  html_site.server().Get("/wayback/", [](const httplib::Request&, httplib::Response& res) {
    res.set_content("<html><head><link rel=\"mementomap\" href=\"mm.ukvs\"></head></html>",
                    "text/html");
  });
  html_site.start();
  src = mm::discover(html_site.url("/wayback/"));
  EXPECT_EQ(src.method, DiscoveryMethod::HtmlLink);
  EXPECT_EQ(src.resolved_map_uri, html_site.url("/wayback/mm.ukvs"));
}

TEST(Discover, ReportsHttpStatus) {
  LoopbackServer bare;
  bare.server().Get("/", [](const httplib::Request&, httplib::Response& res) {
    res.set_content("<html></html>", "text/html");
  });
  LoopbackServer broken;
  broken.server().Get("/.well-known/mementomap",
                      [](const httplib::Request&, httplib::Response& res) { res.status = 500; });
  bare.start();
  broken.start();
  for (auto [server, want] : {std::pair{&bare, 404}, std::pair{&broken, 500}}) {
    try {
      mm::discover(server->url("/"));
      ADD_FAILURE();
    } catch (const mm::Error& e) {
      EXPECT_EQ(e.kind(), mm::ErrorKind::HttpFailure);
      EXPECT_EQ(e.status(), want);
    }
  }
}
