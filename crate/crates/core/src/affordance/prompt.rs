use image::{Rgb, RgbImage};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::{Mask, PixelRect};

pub const MAX_PROMPTS: usize = 2;
pub const DEFAULT_STROKE: u32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PromptColor {
    Red,
    Green,
}

impl PromptColor {
    /// Marker color for the reference at `index`.
    pub fn for_index(index: usize) -> Self {
        if index == 0 {
            PromptColor::Red
        } else {
            PromptColor::Green
        }
    }

    pub fn rgb(self) -> [u8; 3] {
        match self {
            PromptColor::Red => [255, 0, 0],
            PromptColor::Green => [0, 255, 0],
        }
    }

    pub fn word(self) -> &'static str {
        match self {
            PromptColor::Red => "red",
            PromptColor::Green => "green",
        }
    }
}

/// A rectangle outline drawn inside `bbox`, `stroke` pixels thick.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct VisualPrompt {
    pub bbox: PixelRect,
    pub color: PromptColor,
    pub stroke: u32,
}

impl VisualPrompt {
    fn on_perimeter(&self, x: u32, y: u32) -> bool {
        let b = &self.bbox;
        b.contains(x, y)
            && (x < b.x0 + self.stroke
                || y < b.y0 + self.stroke
                || x + self.stroke > b.x1
                || y + self.stroke > b.y1)
    }

    fn check(&self, width: u32, height: u32) -> Result<()> {
        let b = &self.bbox;
        if b.x1 <= b.x0 || b.y1 <= b.y0 || self.stroke == 0 {
            return Err(Error::DegeneratePrompt);
        }
        if b.x1 >= width || b.y1 >= height {
            return Err(Error::Invalid(format!("prompt box {b:?} exceeds {width}x{height}")));
        }
        Ok(())
    }
}

/// Prompts for the given reference masks, in marker order.
pub fn prompts_for_masks(masks: &[&Mask], stroke: u32) -> Result<Vec<VisualPrompt>> {
    if masks.len() > MAX_PROMPTS {
        return Err(Error::TooManyPrompts(masks.len()));
    }
    masks
        .iter()
        .enumerate()
        .map(|(i, m)| {
            let bbox = m.bbox().ok_or(Error::DegeneratePrompt)?;
            let p = VisualPrompt {
                bbox,
                color: PromptColor::for_index(i),
                stroke,
            };
            p.check(m.width(), m.height())?;
            Ok(p)
        })
        .collect()
}

/// Pixels covered by any prompt outline.
pub fn perimeter_mask(prompts: &[VisualPrompt], width: u32, height: u32) -> Mask {
    let mut m = Mask::new(width, height);
    for p in prompts {
        let b = p.bbox;
        for y in b.y0..=b.y1.min(height - 1) {
            for x in b.x0..=b.x1.min(width - 1) {
                if p.on_perimeter(x, y) {
                    m.set(x, y, true);
                }
            }
        }
    }
    m
}

/// Copy of `img` with the prompt outlines drawn; later prompts paint over
/// earlier ones where they cross.
pub fn draw_prompt(img: &RgbImage, prompts: &[VisualPrompt]) -> Result<RgbImage> {
    if prompts.len() > MAX_PROMPTS {
        return Err(Error::TooManyPrompts(prompts.len()));
    }
    for p in prompts {
        p.check(img.width(), img.height())?;
    }
    let mut out = img.clone();
    for p in prompts {
        let b = p.bbox;
        for y in b.y0..=b.y1 {
            for x in b.x0..=b.x1 {
                if p.on_perimeter(x, y) {
                    out.put_pixel(x, y, Rgb(p.color.rgb()));
                }
            }
        }
    }
    Ok(out)
}
