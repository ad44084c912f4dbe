// Copyright 2026 The diecg Authors
// SPDX-License-Identifier: Apache-2.0

#include "diecg/error.hpp"
#include "diecg/raster.hpp"

#include <png.h>
// jpeglib.h needs FILE and size_t declared first.
#include <cstdio>
#include <jpeglib.h>

#include <array>
#include <csetjmp>
#include <cstring>
#include <fstream>
#include <memory>
#include <vector>

namespace diecg {

namespace {

enum class FileKind { Png, Jpeg, Unknown };

FileKind sniff(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open image '" + path.string() + "'");
    std::array<unsigned char, 8> magic{};
    in.read(reinterpret_cast<char*>(magic.data()), magic.size());
    const auto got = in.gcount();
    if (got >= 8 && png_sig_cmp(magic.data(), 0, 8) == 0) return FileKind::Png;
    if (got >= 3 && magic[0] == 0xFF && magic[1] == 0xD8 && magic[2] == 0xFF) return FileKind::Jpeg;
    return FileKind::Unknown;
}

GrayImage decode_png(const std::filesystem::path& path) {
    png_image image;
    std::memset(&image, 0, sizeof(image));
    image.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&image, path.c_str())) {
        throw FormatError("invalid PNG '" + path.string() + "': " + image.message);
    }
    image.format = PNG_FORMAT_RGB;
    const png_color white{255, 255, 255};
    std::vector<png_byte> buffer(PNG_IMAGE_SIZE(image));
    if (!png_image_finish_read(&image, &white, buffer.data(), 0, nullptr)) {
        std::string msg = image.message;
        png_image_free(&image);
        throw FormatError("cannot decode PNG '" + path.string() + "': " + msg);
    }
    const int w = static_cast<int>(image.width), h = static_cast<int>(image.height);
    if (w < 1 || h < 1) throw FormatError("empty PNG '" + path.string() + "'");
    GrayImage out(h, w);
    const png_byte* p = buffer.data();
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x, p += 3) out(y, x) = luminance(p[0], p[1], p[2]);
    }
    return out;
}

struct JpegErrorManager {
    jpeg_error_mgr pub;
    std::jmp_buf escape;
    char message[JMSG_LENGTH_MAX];
};

void jpeg_error_exit(j_common_ptr cinfo) {
    auto* err = reinterpret_cast<JpegErrorManager*>(cinfo->err);
    (*cinfo->err->format_message)(cinfo, err->message);
    std::longjmp(err->escape, 1);
}

GrayImage decode_jpeg(const std::filesystem::path& path) {
    std::unique_ptr<std::FILE, int (*)(std::FILE*)> file(std::fopen(path.c_str(), "rb"), &std::fclose);
    if (!file) throw IoError("cannot open image '" + path.string() + "'");

    jpeg_decompress_struct cinfo;
    JpegErrorManager err;
    cinfo.err = jpeg_std_error(&err.pub);
    err.pub.error_exit = jpeg_error_exit;
    // Nothing with a destructor may live between setjmp and the longjmp target.
    GrayImage out;
    std::vector<JSAMPLE> row;
    if (setjmp(err.escape)) {
        jpeg_destroy_decompress(&cinfo);
        throw FormatError("cannot decode JPEG '" + path.string() + "': " + err.message);
    }
    jpeg_create_decompress(&cinfo);
    jpeg_stdio_src(&cinfo, file.get());
    jpeg_read_header(&cinfo, TRUE);
    const bool gray = cinfo.num_components == 1;
    cinfo.out_color_space = gray ? JCS_GRAYSCALE : JCS_RGB;
    jpeg_start_decompress(&cinfo);

    const int w = static_cast<int>(cinfo.output_width), h = static_cast<int>(cinfo.output_height);
    const int comps = cinfo.output_components;
    out.resize(h, w);
    row.resize(static_cast<std::size_t>(w) * comps);
    while (cinfo.output_scanline < cinfo.output_height) {
        const int y = static_cast<int>(cinfo.output_scanline);
        JSAMPROW rp = row.data();
        jpeg_read_scanlines(&cinfo, &rp, 1);
        for (int x = 0; x < w; ++x) {
            const JSAMPLE* px = row.data() + static_cast<std::size_t>(x) * comps;
            out(y, x) = comps == 1 ? px[0] : luminance(px[0], px[1], px[2]);
        }
    }
    jpeg_finish_decompress(&cinfo);
    jpeg_destroy_decompress(&cinfo);
    if (w < 1 || h < 1) throw FormatError("empty JPEG '" + path.string() + "'");
    return out;
}

void write_png_buffer(const std::filesystem::path& path, int width, int height, png_uint_32 format,
                      const png_byte* data) {
    png_image image;
    std::memset(&image, 0, sizeof(image));
    image.version = PNG_IMAGE_VERSION;
    image.width = static_cast<png_uint_32>(width);
    image.height = static_cast<png_uint_32>(height);
    image.format = format;
    image.flags = PNG_IMAGE_FLAG_FAST;
    if (!png_image_write_to_file(&image, path.c_str(), 0, data, 0, nullptr)) {
        throw IoError("cannot write PNG '" + path.string() + "': " + image.message);
    }
}

}  // namespace

GrayImage load_grayscale(const std::filesystem::path& path) {
    std::error_code ec;
    if (!std::filesystem::is_regular_file(path, ec)) {
        throw IoError("cannot read image '" + path.string() + "'");
    }
    switch (sniff(path)) {
        case FileKind::Png: return decode_png(path);
        case FileKind::Jpeg: return decode_jpeg(path);
        case FileKind::Unknown: break;
    }
    throw FormatError("unsupported image format '" + path.string() + "' (PNG or JPEG expected)");
}

void write_png(const std::filesystem::path& path, const GrayImage& img) {
    write_png_buffer(path, static_cast<int>(img.cols()), static_cast<int>(img.rows()), PNG_FORMAT_GRAY,
                     img.data());
}

void write_png(const std::filesystem::path& path, const RgbImage& img) {
    const auto n = static_cast<std::size_t>(img.width() * img.height());
    std::vector<png_byte> buf(n * 3);
    for (std::size_t i = 0; i < n; ++i) {
        buf[3 * i] = img.r.data()[i];
        buf[3 * i + 1] = img.g.data()[i];
        buf[3 * i + 2] = img.b.data()[i];
    }
    write_png_buffer(path, static_cast<int>(img.width()), static_cast<int>(img.height()), PNG_FORMAT_RGB,
                     buf.data());
}

void write_png(const std::filesystem::path& path, const BinaryImage& img) {
    const GrayImage gray = img.select(GrayImage::Zero(img.rows(), img.cols()).array(),
                                      GrayImage::Constant(img.rows(), img.cols(), 255).array())
                               .matrix();
    write_png(path, gray);
}

}  // namespace diecg
