use std::io::Cursor;

#[derive(Debug, thiserror::Error)]
pub enum RasterError {
    #[error("pixel buffer holds {actual} pixels, expected {width}x{height}")]
    Size {
        width: u32,
        height: u32,
        actual: usize,
    },
    #[error("scale must be finite and > 0, got {0}")]
    Scale(f64),
    #[error("cannot decode PNG: {0}")]
    Decode(String),
    #[error("cannot encode PNG: {0}")]
    Encode(String),
}

/// Screenshot pixels in device pixels, row-major RGB.
#[derive(Debug, Clone, PartialEq)]
pub struct Raster {
    width: u32,
    height: u32,
    pixels: Vec<[u8; 3]>,
    scale: f64,
}

impl Raster {
    pub fn new(
        width: u32,
        height: u32,
        pixels: Vec<[u8; 3]>,
        scale: f64,
    ) -> Result<Self, RasterError> {
        if pixels.len() != width as usize * height as usize {
            return Err(RasterError::Size {
                width,
                height,
                actual: pixels.len(),
            });
        }
        if !(scale.is_finite() && scale > 0.0) {
            return Err(RasterError::Scale(scale));
        }
        Ok(Raster {
            width,
            height,
            pixels,
            scale,
        })
    }

    pub fn filled(width: u32, height: u32, rgb: [u8; 3], scale: f64) -> Result<Self, RasterError> {
        Raster::new(
            width,
            height,
            vec![rgb; width as usize * height as usize],
            scale,
        )
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    /// Device pixels per CSS pixel.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn pixels(&self) -> &[[u8; 3]] {
        &self.pixels
    }

    pub fn pixel(&self, x: u32, y: u32) -> [u8; 3] {
        self.pixels[y as usize * self.width as usize + x as usize]
    }

    pub fn set_pixel(&mut self, x: u32, y: u32, rgb: [u8; 3]) {
        let w = self.width as usize;
        self.pixels[y as usize * w + x as usize] = rgb;
    }

    /// Paints a device-pixel rectangle, clipped to the raster.
    pub fn fill_rect(&mut self, x: u32, y: u32, w: u32, h: u32, rgb: [u8; 3]) {
        for yy in y..(y.saturating_add(h)).min(self.height) {
            for xx in x..(x.saturating_add(w)).min(self.width) {
                self.set_pixel(xx, yy, rgb);
            }
        }
    }

    /// Stacks `copies` of this raster vertically.
    pub fn tiled_vertically(&self, copies: u32) -> Raster {
        let mut pixels = Vec::with_capacity(self.pixels.len() * copies as usize);
        for _ in 0..copies {
            pixels.extend_from_slice(&self.pixels);
        }
        Raster {
            width: self.width,
            height: self.height * copies,
            pixels,
            scale: self.scale,
        }
    }

    /// Decodes a PNG; alpha is dropped and grayscale expanded to RGB.
    pub fn from_png(bytes: &[u8], scale: f64) -> Result<Self, RasterError> {
        let mut decoder = png::Decoder::new(Cursor::new(bytes));
        decoder.set_transformations(png::Transformations::EXPAND | png::Transformations::STRIP_16);
        let mut reader = decoder
            .read_info()
            .map_err(|e| RasterError::Decode(e.to_string()))?;
        let size = reader
            .output_buffer_size()
            .ok_or_else(|| RasterError::Decode("image too large".into()))?;
        let mut buf = vec![0u8; size];
        let info = reader
            .next_frame(&mut buf)
            .map_err(|e| RasterError::Decode(e.to_string()))?;
        let channels = match info.color_type {
            png::ColorType::Grayscale => 1,
            png::ColorType::GrayscaleAlpha => 2,
            png::ColorType::Rgb => 3,
            png::ColorType::Rgba => 4,
            png::ColorType::Indexed => {
                return Err(RasterError::Decode("unexpanded palette image".into()))
            }
        };
        let mut pixels = Vec::with_capacity(info.width as usize * info.height as usize);
        for row in buf[..info.buffer_size()].chunks(info.line_size) {
            for px in row.chunks(channels).take(info.width as usize) {
                pixels.push(match channels {
                    1 | 2 => [px[0], px[0], px[0]],
                    _ => [px[0], px[1], px[2]],
                });
            }
        }
        Raster::new(info.width, info.height, pixels, scale)
    }

    pub fn to_png(&self) -> Result<Vec<u8>, RasterError> {
        let mut out = Vec::new();
        {
            let mut encoder = png::Encoder::new(&mut out, self.width, self.height);
            encoder.set_color(png::ColorType::Rgb);
            encoder.set_depth(png::BitDepth::Eight);
            let mut writer = encoder
                .write_header()
                .map_err(|e| RasterError::Encode(e.to_string()))?;
            let data: Vec<u8> = self.pixels.iter().flatten().copied().collect();
            writer
                .write_image_data(&data)
                .map_err(|e| RasterError::Encode(e.to_string()))?;
        }
        Ok(out)
    }
}
