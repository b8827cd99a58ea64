use std::collections::{BTreeSet, HashMap, HashSet};

use super::bits::{bits_for, BitReader, BitWriter};
use super::crc::crc16_bits;
use super::quant::{angle_bin, bin_angle, QuantParams};
use super::{Bitstream, CodecError, StreamHeader, CRC_BITS, HEADER_BITS, MAX_OBJECTS, VERSION};
use crate::oar::{
    Attributes, Category, GopStream, OarFrame, ObjectId, Relation, RelationLabel, BACKGROUND,
};

const CATEGORY_BITS: u32 = 3;
const LABEL_BITS: u32 = 2;

#[derive(Clone, Copy)]
struct Widths {
    x: u32,
    y: u32,
    angle: u32,
}

impl Widths {
    fn new(width: u32, height: u32, params: QuantParams) -> Widths {
        Widths {
            x: bits_for(width as u64),
            y: bits_for(height as u64),
            angle: params.q_angle() as u32,
        }
    }
}

/// Binned view of one object used on both sides of the codec.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Coded {
    category: Category,
    x: u32,
    y: u32,
    w: u32,
    h: u32,
    bin: u64,
}

impl Coded {
    fn of(a: &Attributes, params: QuantParams) -> Coded {
        Coded {
            category: a.category,
            x: a.x,
            y: a.y,
            w: a.w,
            h: a.h,
            bin: angle_bin(a.angle, params),
        }
    }

    fn attributes(&self, params: QuantParams) -> Attributes {
        Attributes {
            x: self.x,
            y: self.y,
            w: self.w,
            h: self.h,
            angle: bin_angle(self.bin, params),
            category: self.category,
        }
    }
}

fn put_full(w: &mut BitWriter, c: &Coded, widths: Widths) {
    w.put(c.category.code() as u64, CATEGORY_BITS);
    w.put(c.x as u64, widths.x);
    w.put(c.y as u64, widths.y);
    w.put(c.w as u64, widths.x);
    w.put(c.h as u64, widths.y);
    w.put(c.bin, widths.angle);
}

fn get_full(r: &mut BitReader<'_>, widths: Widths) -> Result<Coded, CodecError> {
    let code = r.get(CATEGORY_BITS)? as u8;
    let category = Category::from_code(code)
        .ok_or_else(|| CodecError::Invalid(format!("category code {code}")))?;
    Ok(Coded {
        category,
        x: r.get(widths.x)? as u32,
        y: r.get(widths.y)? as u32,
        w: r.get(widths.x)? as u32,
        h: r.get(widths.y)? as u32,
        bin: r.get(widths.angle)?,
    })
}

/// Shortest signed step from bin `from` to bin `to` on a ring of `bins`.
fn circular_delta(from: u64, to: u64, bins: u64) -> i64 {
    let d = (to + bins - from) % bins;
    if d >= bins / 2 && bins > 1 {
        d as i64 - bins as i64
    } else {
        d as i64
    }
}

fn put_relations(w: &mut BitWriter, frame: &OarFrame) {
    let index: HashMap<ObjectId, u64> = frame
        .objects
        .iter()
        .enumerate()
        .map(|(i, id)| (*id, i as u64 + 1))
        .chain(std::iter::once((BACKGROUND, 0)))
        .collect();
    let implied = |r: &Relation| r.label == RelationLabel::In && r.object == BACKGROUND;
    let all_in = frame.objects.iter().all(|&o| {
        frame
            .relations
            .contains(&Relation::new(o, BACKGROUND, RelationLabel::In))
    });
    w.put_bit(all_in);
    let explicit: Vec<&Relation> = frame
        .relations
        .iter()
        .filter(|r| !(all_in && implied(r) && r.subject != BACKGROUND))
        .collect();
    let width = bits_for(frame.objects.len() as u64);
    w.put_ue(explicit.len() as u64);
    for r in explicit {
        w.put(index[&r.subject], width);
        w.put(index[&r.object], width);
        w.put(r.label.code() as u64, LABEL_BITS);
    }
}

fn get_relations(
    r: &mut BitReader<'_>,
    objects: &[ObjectId],
) -> Result<BTreeSet<Relation>, CodecError> {
    let all_in = r.bit()?;
    let count = r.get_ue()?;
    let width = bits_for(objects.len() as u64);
    let endpoint = |i: u64| -> Result<ObjectId, CodecError> {
        match i {
            0 => Ok(BACKGROUND),
            i if i as usize <= objects.len() => Ok(objects[i as usize - 1]),
            i => Err(CodecError::Invalid(format!("relation endpoint index {i}"))),
        }
    };
    let mut rels = BTreeSet::new();
    for _ in 0..count {
        let s = endpoint(r.get(width)?)?;
        let o = endpoint(r.get(width)?)?;
        let code = r.get(LABEL_BITS)? as u8;
        let label = RelationLabel::from_code(code)
            .ok_or_else(|| CodecError::Invalid(format!("relation label code {code}")))?;
        if !rels.insert(Relation::new(s, o, label)) {
            return Err(CodecError::Invalid("repeated relation".into()));
        }
    }
    if all_in {
        for &o in objects {
            rels.insert(Relation::new(o, BACKGROUND, RelationLabel::In));
        }
    }
    Ok(rels)
}

fn check_capacity(frame: &OarFrame) -> Result<(), CodecError> {
    if frame.objects.len() > MAX_OBJECTS {
        return Err(CodecError::Capacity {
            frame: frame.frame_index,
            count: frame.objects.len(),
        });
    }
    Ok(())
}

fn put_intra(
    w: &mut BitWriter,
    frame: &OarFrame,
    params: QuantParams,
    widths: Widths,
    max_id: &mut i64,
) {
    w.put_ue(frame.objects.len() as u64);
    let mut prev = 0i64;
    for (id, a) in frame.iter() {
        w.put_se(id as i64 - prev - 1);
        prev = id as i64;
        *max_id = (*max_id).max(id as i64);
        put_full(w, &Coded::of(a, params), widths);
    }
    put_relations(w, frame);
}

fn put_inter(
    w: &mut BitWriter,
    prev: &OarFrame,
    frame: &OarFrame,
    params: QuantParams,
    widths: Widths,
    max_id: &mut i64,
) {
    // a category change cannot be a delta, so it is coded as death plus birth
    let persists = |id: ObjectId| {
        frame
            .get(id)
            .is_some_and(|a| a.category == prev.attributes[&id].category)
    };
    let deaths: Vec<usize> = prev
        .objects
        .iter()
        .enumerate()
        .filter(|(_, id)| !persists(**id))
        .map(|(i, _)| i)
        .collect();
    let index_width = bits_for(prev.objects.len().saturating_sub(1) as u64);
    w.put_ue(deaths.len() as u64);
    for &i in &deaths {
        w.put(i as u64, index_width);
    }
    let survivors: HashMap<ObjectId, usize> = prev
        .objects
        .iter()
        .filter(|id| persists(**id))
        .enumerate()
        .map(|(i, id)| (*id, i))
        .collect();
    let survivor_width = bits_for(survivors.len().saturating_sub(1) as u64);
    let bins = params.angle_bins();

    w.put_ue(frame.objects.len() as u64);
    for (id, a) in frame.iter() {
        let cur = Coded::of(a, params);
        match survivors.get(&id) {
            Some(&s) => {
                let old = Coded::of(&prev.attributes[&id], params);
                w.put_bit(true);
                w.put(s as u64, survivor_width);
                w.put_se(cur.x as i64 - old.x as i64);
                w.put_se(cur.y as i64 - old.y as i64);
                w.put_se(cur.w as i64 - old.w as i64);
                w.put_se(cur.h as i64 - old.h as i64);
                w.put_se(circular_delta(old.bin, cur.bin, bins));
            }
            None => {
                w.put_bit(false);
                w.put_se(id as i64 - *max_id - 1);
                put_full(w, &cur, widths);
            }
        }
        *max_id = (*max_id).max(id as i64);
    }
    put_relations(w, frame);
}

/// Encodes one group of pictures. Angles are quantised on the way in.
pub fn encode_gop(gop: &GopStream, params: QuantParams) -> Result<Bitstream, CodecError> {
    gop.validate()?;
    if gop.width > u16::MAX as u32
        || gop.height > u16::MAX as u32
        || gop.gop_length > u16::MAX as u32
    {
        return Err(CodecError::Invalid(
            "canvas or GoP length exceeds 16 bits".into(),
        ));
    }
    let widths = Widths::new(gop.width, gop.height, params);
    let mut payload = BitWriter::new();
    let mut max_id = 0i64;
    for (t, frame) in gop.frames.iter().enumerate() {
        check_capacity(frame)?;
        if t == 0 {
            put_intra(&mut payload, frame, params, widths, &mut max_id);
        } else {
            put_inter(
                &mut payload,
                &gop.frames[t - 1],
                frame,
                params,
                widths,
                &mut max_id,
            );
        }
    }
    finish(gop, params, payload)
}

fn finish(
    gop: &GopStream,
    params: QuantParams,
    payload: BitWriter,
) -> Result<Bitstream, CodecError> {
    let (payload_bytes, payload_bits) = payload.finish();
    if payload_bits > u32::MAX as usize {
        return Err(CodecError::Invalid("payload longer than 2^32 bits".into()));
    }
    let header = StreamHeader {
        version: VERSION,
        width: gop.width,
        height: gop.height,
        gop_length: gop.gop_length,
        q_angle: params.q_angle(),
        category_count: Category::COUNT as u8,
        relation_count: RelationLabel::COUNT as u8,
        payload_bits,
    };
    let mut w = BitWriter::new();
    header.write(&mut w);
    let mut r = BitReader::new(&payload_bytes, payload_bits);
    while r.remaining() > 0 {
        w.put_bit(r.bit().expect("within payload"));
    }
    let (bytes, len) = w.clone().finish();
    w.put(crc16_bits(&bytes, len) as u64, CRC_BITS as u32);
    let (bytes, len) = w.finish();
    Ok(Bitstream::from_parts(bytes, len))
}

/// Decoded stream plus its bit layout.
#[derive(Clone, Debug, PartialEq)]
pub struct ParsedStream {
    pub header: StreamHeader,
    pub gop: GopStream,
    /// Payload bits spent on each frame record.
    pub frame_bits: Vec<usize>,
}

/// Decodes a stream produced by [`encode_gop`]. The reference payload of the
/// returned GoP is empty: it travels outside the OAR stream.
pub fn decode_gop(bits: &Bitstream) -> Result<GopStream, CodecError> {
    parse_stream(bits).map(|p| p.gop)
}

pub fn parse_stream(bits: &Bitstream) -> Result<ParsedStream, CodecError> {
    let mut r = bits.reader();
    let header = StreamHeader::read(&mut r)?;
    let needed = header.stream_bits();
    if bits.bit_len() < needed {
        return Err(CodecError::Truncated {
            at_bit: bits.bit_len(),
        });
    }
    if bits.bit_len() > needed {
        return Err(CodecError::Invalid(format!(
            "{} bits after the CRC trailer",
            bits.bit_len() - needed
        )));
    }
    let covered = HEADER_BITS + header.payload_bits;
    let computed = crc16_bits(bits.as_bytes(), covered);
    let mut tail = BitReader::new(bits.as_bytes(), needed);
    for _ in 0..covered {
        tail.bit()?;
    }
    let stored = tail.get(CRC_BITS as u32)? as u16;
    if stored != computed {
        return Err(CodecError::CrcMismatch { stored, computed });
    }

    if header.category_count as usize != Category::COUNT
        || header.relation_count as usize != RelationLabel::COUNT
    {
        return Err(CodecError::Invalid(format!(
            "vocabulary {}/{} does not match {}/{}",
            header.category_count,
            header.relation_count,
            Category::COUNT,
            RelationLabel::COUNT
        )));
    }
    let params = QuantParams::new(header.q_angle)?;
    if header.width == 0 || header.height == 0 {
        return Err(CodecError::Invalid("empty canvas".into()));
    }
    let widths = Widths::new(header.width, header.height, params);

    let mut r = BitReader::new(bits.as_bytes(), covered);
    for _ in 0..HEADER_BITS {
        r.bit()?;
    }
    let mut frames: Vec<OarFrame> = Vec::with_capacity(header.gop_length as usize);
    let mut frame_bits = Vec::with_capacity(header.gop_length as usize);
    let mut max_id = 0i64;
    for t in 0..header.gop_length {
        let start = r.position();
        let frame = if t == 0 {
            get_intra(&mut r, params, widths, &mut max_id)?
        } else {
            get_inter(
                &mut r,
                &frames[t as usize - 1],
                t + 1,
                params,
                widths,
                &mut max_id,
            )?
        };
        frame
            .validate(header.width, header.height)
            .map_err(|source| CodecError::InvalidFrame {
                frame: t + 1,
                source,
            })?;
        frame_bits.push(r.position() - start);
        frames.push(frame);
    }
    if r.remaining() != 0 {
        return Err(CodecError::Invalid(format!(
            "{} unused payload bits",
            r.remaining()
        )));
    }
    Ok(ParsedStream {
        header,
        gop: GopStream::new(header.width, header.height, frames),
        frame_bits,
    })
}

fn read_count(r: &mut BitReader<'_>) -> Result<usize, CodecError> {
    let n = r.get_ue()?;
    if n > MAX_OBJECTS as u64 {
        return Err(CodecError::Invalid(format!("object count {n}")));
    }
    Ok(n as usize)
}

fn checked_id(v: i64) -> Result<ObjectId, CodecError> {
    if v <= 0 || v > u32::MAX as i64 {
        return Err(CodecError::Invalid(format!("object id {v}")));
    }
    Ok(v as ObjectId)
}

fn get_intra(
    r: &mut BitReader<'_>,
    params: QuantParams,
    widths: Widths,
    max_id: &mut i64,
) -> Result<OarFrame, CodecError> {
    let n = read_count(r)?;
    let mut frame = OarFrame::empty(1);
    let mut prev = 0i64;
    for _ in 0..n {
        let id = checked_id(prev.saturating_add(r.get_se()?).saturating_add(1))?;
        prev = id as i64;
        *max_id = (*max_id).max(id as i64);
        let c = get_full(r, widths)?;
        if frame.contains(id) {
            return Err(CodecError::Invalid(format!("object {id} coded twice")));
        }
        frame.push(id, c.attributes(params));
    }
    frame.relations = get_relations(r, &frame.objects)?;
    Ok(frame)
}

fn get_inter(
    r: &mut BitReader<'_>,
    prev: &OarFrame,
    frame_index: u32,
    params: QuantParams,
    widths: Widths,
    max_id: &mut i64,
) -> Result<OarFrame, CodecError> {
    let index_width = bits_for(prev.objects.len().saturating_sub(1) as u64);
    let deaths = read_count(r)?;
    let mut dead = HashSet::with_capacity(deaths);
    let mut last: Option<u64> = None;
    for _ in 0..deaths {
        let i = r.get(index_width)?;
        if i as usize >= prev.objects.len() || last.is_some_and(|l| i <= l) {
            return Err(CodecError::Invalid(format!("death index {i}")));
        }
        last = Some(i);
        dead.insert(i as usize);
    }
    let survivors: Vec<ObjectId> = prev
        .objects
        .iter()
        .enumerate()
        .filter(|(i, _)| !dead.contains(i))
        .map(|(_, id)| *id)
        .collect();
    let survivor_width = bits_for(survivors.len().saturating_sub(1) as u64);
    let bins = params.angle_bins();
    let mut used = vec![false; survivors.len()];

    let n = read_count(r)?;
    let mut frame = OarFrame::empty(frame_index);
    for _ in 0..n {
        let (id, coded) = if r.bit()? {
            let s = r.get(survivor_width)? as usize;
            if s >= survivors.len() || std::mem::replace(&mut used[s], true) {
                return Err(CodecError::Invalid(format!("survivor index {s}")));
            }
            let id = survivors[s];
            let old = Coded::of(&prev.attributes[&id], params);
            let field = |base: u32, d: i64| -> Result<u32, CodecError> {
                let v = base as i64 + d;
                u32::try_from(v)
                    .map_err(|_| CodecError::Invalid(format!("delta leaves range: {v}")))
            };
            let x = field(old.x, r.get_se()?)?;
            let y = field(old.y, r.get_se()?)?;
            let w = field(old.w, r.get_se()?)?;
            let h = field(old.h, r.get_se()?)?;
            let d = r.get_se()?;
            if d.unsigned_abs() > bins {
                return Err(CodecError::Invalid(format!("angle delta {d}")));
            }
            let bin = (old.bin as i64 + d).rem_euclid(bins as i64) as u64;
            (
                id,
                Coded {
                    category: old.category,
                    x,
                    y,
                    w,
                    h,
                    bin,
                },
            )
        } else {
            let id = checked_id(max_id.saturating_add(r.get_se()?).saturating_add(1))?;
            if survivors.contains(&id) {
                return Err(CodecError::Invalid(format!("birth of live object {id}")));
            }
            (id, get_full(r, widths)?)
        };
        if frame.contains(id) {
            return Err(CodecError::Invalid(format!("object {id} coded twice")));
        }
        *max_id = (*max_id).max(id as i64);
        frame.push(id, coded.attributes(params));
    }
    if used.iter().any(|u| !u) {
        return Err(CodecError::Invalid("survivor never referenced".into()));
    }
    frame.relations = get_relations(r, &frame.objects)?;
    Ok(frame)
}
