mod common;

use oarvc::codec::{decode_gop, encode_gop, parse_stream, quantize_gop, QuantParams};
use oarvc::ingest::{generate_synthetic, ObjectProgram, SyntheticSceneSpec};
use oarvc::{Attributes, Category, GopStream};
use proptest::prelude::*;

fn fresh_object(gop: &GopStream) -> u32 {
    gop.frames
        .iter()
        .flat_map(|f| f.objects.iter().copied())
        .max()
        .unwrap_or(0)
        + 1
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn round_trip_equals_quantized(seed in any::<u64>(), q in 1u8..=12) {
        let g = common::random_gop(seed);
        let q = QuantParams::new(q).unwrap();
        let s = encode_gop(&g, q).unwrap();
        prop_assert_eq!(decode_gop(&s).unwrap(), quantize_gop(&g, q));
    }

    #[test]
    fn encoding_is_deterministic(seed in any::<u64>()) {
        let g = common::random_gop(seed);
        let a = encode_gop(&g, QuantParams::default()).unwrap();
        let b = encode_gop(&g.clone(), QuantParams::default()).unwrap();
        prop_assert_eq!(a.as_bytes(), b.as_bytes());
        prop_assert_eq!(a.bit_len(), b.bit_len());
    }

    #[test]
    fn adding_an_object_never_removes_bits(seed in any::<u64>(), frame in any::<prop::sample::Index>(), x in 0u32..1000, y in 0u32..1000) {
        let g = common::random_gop(seed);
        let before = encode_gop(&g, QuantParams::default()).unwrap().bit_len();
        let mut h = g.clone();
        let t = frame.index(h.frames.len());
        let id = fresh_object(&g);
        h.frames[t].push(id, Attributes {
            x: x % g.width,
            y: y % g.height,
            w: 1,
            h: 1,
            angle: 0.0,
            category: Category::Van,
        });
        let after = encode_gop(&h, QuantParams::default()).unwrap().bit_len();
        prop_assert!(after >= before, "{} -> {}", before, after);
    }

    #[test]
    fn single_bit_flip_never_decodes_silently(seed in any::<u64>(), pos in any::<prop::sample::Index>()) {
        let g = common::random_gop(seed);
        let mut s = encode_gop(&g, QuantParams::default()).unwrap();
        let i = pos.index(s.bit_len());
        s.flip(i);
        prop_assert!(decode_gop(&s).is_err());
    }
}

#[test]
fn static_scene_p_frames_below_i_frame() {
    let mut spec = SyntheticSceneSpec::new(2, 320, 240, 15);
    for i in 0..5 {
        spec.objects.push(ObjectProgram::fixed(
            i + 1,
            Category::Car,
            10.0 + 50.0 * i as f64,
            40.0,
            30.0,
            20.0,
        ));
    }
    let g = generate_synthetic(&spec).unwrap().gop;
    let parsed = parse_stream(&encode_gop(&g, QuantParams::default()).unwrap()).unwrap();
    let intra = parsed.frame_bits[0];
    assert!(
        parsed.frame_bits[1..].iter().all(|&b| b < intra),
        "{:?}",
        parsed.frame_bits
    );
}

#[test]
fn truncation_is_detected() {
    let g = common::random_gop(99);
    let s = encode_gop(&g, QuantParams::default()).unwrap();
    for cut in [1, 8, s.bit_len() / 2, s.bit_len() - 1] {
        let t = oarvc::codec::Bitstream::from_parts(s.as_bytes().to_vec(), s.bit_len() - cut);
        assert!(decode_gop(&t).is_err(), "cut {cut}");
    }
}
