#include "manifest.hpp"

#include <cstdio>
#include <iostream>

#include <openssl/evp.h>

#include "rangelab/errors.hpp"

#ifndef RANGELAB_GIT_DESCRIBE
#define RANGELAB_GIT_DESCRIBE "unknown"
#endif
#ifndef RANGELAB_VERSION
#define RANGELAB_VERSION "0.0.0"
#endif

namespace rangelab::cli {

std::string sha256_file(const std::string& file) {
  std::ifstream in(file, std::ios::binary);
  require(static_cast<bool>(in), "cannot read " + file);
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr);
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof buf);
    if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf, static_cast<std::size_t>(in.gcount()));
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), md, &len);
  std::string hex;
  char byte[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(byte, sizeof byte, "%02x", md[i]);
    hex += byte;
  }
  return hex;
}

CsvWriter::CsvWriter(const std::string& file) : file_(file) {
  if (!file_.empty()) {
    out_ = std::make_unique<std::ofstream>(file_, std::ios::binary | std::ios::trunc);
    require(static_cast<bool>(*out_), "cannot write " + file_);
  }
}

void CsvWriter::row(const std::vector<std::string>& cells) {
  std::string line;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i > 0) line += ',';
    const auto& c = cells[i];
    if (c.find_first_of(",\"\r\n") == std::string::npos) {
      line += c;
    } else {
      line += '"';
      for (char ch : c) {
        if (ch == '"') line += '"';
        line += ch;
      }
      line += '"';
    }
  }
  line += "\r\n";
  if (out_) {
    *out_ << line;
  } else {
    std::cout << line;
  }
}

std::string cell(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string cell(std::int64_t v) { return std::to_string(v); }

std::string manifest_path_for(const std::string& output) { return output + ".manifest.json"; }

void Manifest::write(const std::string& path) const {
  if (path.empty() && outputs.empty()) return;
  json m;
  m["tool_version"] = RANGELAB_VERSION;
  m["git_describe"] = RANGELAB_GIT_DESCRIBE;
  m["subcommand"] = subcommand;
  m["argv"] = argv;
  m["flags"] = flags;
  m["seed"] = seed;
  m["streams"] = streams;
  m["constants"] = constants;
  m["results"] = results;
  json digests = json::object();
  for (const auto& f : outputs) digests[f] = sha256_file(f);
  m["outputs"] = digests;
  m["wall_time_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  const std::string file = path.empty() ? manifest_path_for(outputs.front()) : path;
  std::ofstream out(file, std::ios::trunc);
  require(static_cast<bool>(out), "cannot write " + file);
  out << m.dump(2) << '\n';
}

}  // namespace rangelab::cli
