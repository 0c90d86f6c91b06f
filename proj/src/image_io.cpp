// Copyright 2026 The Bilagrid Authors
// SPDX-License-Identifier: Apache-2.0

#include <png.h>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>

#include "bilagrid/io.hpp"
#include "byte_stream.hpp"

namespace bilagrid {

void writeRawImage(const std::filesystem::path& path, const Image& img) {
    ByteWriter w;
    w.magic("BIMG");
    w.u32(kFormatVersion);
    w.u32(static_cast<std::uint32_t>(img.width));
    w.u32(static_cast<std::uint32_t>(img.height));
    for (int k = 0; k < 3; ++k) {
        for (const auto& px : img.pixels) w.f32(px[k]);
    }
    writeBytes(path, w.bytes);
}

Image readRawImage(const std::filesystem::path& path) {
    const auto bytes = readBytes(path);
    ByteReader r(bytes, path.string());
    r.expectMagic("BIMG");
    r.expectVersion(kFormatVersion);
    const auto w = r.u32();
    const auto h = r.u32();
    if (w == 0 || h == 0 || w > 65536 || h > 65536) throw FormatError(path.string() + ": bad image dimensions");
    Image img(static_cast<int>(w), static_cast<int>(h));
    for (int k = 0; k < 3; ++k) {
        for (auto& px : img.pixels) px[k] = r.f32();
    }
    r.expectEnd();
    return img;
}

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

}  // namespace

void writePng(const std::filesystem::path& path, const Image& img) {
    FilePtr fp(std::fopen(path.c_str(), "wb"));
    if (!fp) throw std::runtime_error("cannot open for writing: " + path.string());
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png_create_info_struct(png);
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw std::runtime_error("PNG encode failed: " + path.string());
    }
    png_init_io(png, fp.get());
    png_set_IHDR(png, info, static_cast<png_uint_32>(img.width), static_cast<png_uint_32>(img.height), 8,
                 PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    std::vector<unsigned char> row(static_cast<std::size_t>(img.width) * 3);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            for (int k = 0; k < 3; ++k) {
                row[static_cast<std::size_t>(x) * 3 + k] =
                    static_cast<unsigned char>(std::lround(clamp01(img.at(x, y)[k]) * 255.0));
            }
        }
        png_write_row(png, row.data());
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

Image readPng(const std::filesystem::path& path) {
    FilePtr fp(std::fopen(path.c_str(), "rb"));
    if (!fp) throw FormatError("cannot open: " + path.string());
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png_create_info_struct(png);
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw FormatError("PNG decode failed: " + path.string());
    }
    png_init_io(png, fp.get());
    png_read_info(png, info);
    png_set_strip_16(png);
    png_set_palette_to_rgb(png);
    png_set_gray_to_rgb(png);
    png_set_strip_alpha(png);
    png_read_update_info(png, info);
    const int w = static_cast<int>(png_get_image_width(png, info));
    const int h = static_cast<int>(png_get_image_height(png, info));
    Image img(w, h);
    std::vector<unsigned char> row(png_get_rowbytes(png, info));
    for (int y = 0; y < h; ++y) {
        png_read_row(png, row.data(), nullptr);
        for (int x = 0; x < w; ++x) {
            for (int k = 0; k < 3; ++k) img.at(x, y)[k] = row[static_cast<std::size_t>(x) * 3 + k] / 255.0;
        }
    }
    png_destroy_read_struct(&png, &info, nullptr);
    return img;
}

Image readImage(const std::filesystem::path& path) {
    if (path.extension() == ".png") return readPng(path);
    return readRawImage(path);
}

void writeImage(const std::filesystem::path& path, const Image& img) {
    if (path.extension() == ".png") {
        writePng(path, img);
    } else {
        writeRawImage(path, img);
    }
}

}  // namespace bilagrid
