//! Segment a page image into ordered glyph crops.
//!
//! Renders a small synthetic page (so the example needs no input files),
//! then walks the full segmentation chain: grayscale, Otsu threshold,
//! binarization, morphological opening, connected components, size filter,
//! reading-order sort, padded crops.
//!
//! Run with: cargo run --example segment_page

use scriptoria::imaging::{
    binarize, extract_components, morphological_open, otsu_threshold, segment_page, to_grayscale,
    SegmentParams,
};
use scriptoria::synth::render_page;

fn main() {
    let text = "feadbcbadcfeabdc";
    let page = render_page(text, 8);
    println!(
        "rendered page: {}x{} px, {} characters on 2 lines",
        page.width,
        page.height,
        text.len()
    );

    // The individual steps, for a look inside.
    let gray = to_grayscale(&page).unwrap();
    let t = otsu_threshold(&gray).unwrap();
    let bin = binarize(&gray, t, true).unwrap();
    let opened = morphological_open(&bin, 3).unwrap();
    let components = extract_components(&opened);
    println!(
        "otsu threshold {t}, {} foreground px, {} components",
        opened.count_foreground(),
        components.len()
    );

    // The same chain as one call.
    let params = SegmentParams::default();
    let crops = segment_page(&page, &params, "demo", 0).unwrap();
    println!("segmented {} glyph crops:", crops.len());
    for crop in &crops {
        println!(
            "  {} line {} box ({:>3},{:>3}) {}x{} patch {}x{}",
            crop.glyph_id(),
            crop.line,
            crop.bbox.x,
            crop.bbox.y,
            crop.bbox.w,
            crop.bbox.h,
            crop.patch.width,
            crop.patch.height
        );
    }

    // ASCII rendering of the first crop.
    let first = &crops[0];
    println!("first crop ('{}'):", text.chars().next().unwrap());
    for y in 0..first.patch.height {
        let row: String = (0..first.patch.width)
            .map(|x| if first.patch.get(x, y) { '#' } else { '.' })
            .collect();
        println!("  {row}");
    }
}
