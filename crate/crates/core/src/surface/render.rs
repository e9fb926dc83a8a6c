use std::collections::BTreeMap;

use crate::geometry::{dot, Assembly, CubioId, Dir, FaceTurn, LocalFace};

use super::{FacetAddress, GlobalFace, Grid, SurfaceCoord, FACET_PX, FACE_PX};

pub type Rgb = [u8; 3];

pub const NET_WIDTH: usize = 4 * FACE_PX as usize;
pub const NET_HEIGHT: usize = 3 * FACE_PX as usize;

/// Colour of every pixel of the surface.
#[derive(Clone, PartialEq, Eq)]
pub struct Field {
    px: Vec<Rgb>,
}

impl std::fmt::Debug for Field {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Field")
            .field("pixels", &self.px.len())
            .finish()
    }
}

impl Field {
    pub fn uniform(c: Rgb) -> Field {
        Field {
            px: vec![c; Grid::PIXELS.len()],
        }
    }

    pub fn get(&self, c: SurfaceCoord) -> Rgb {
        self.px[Grid::PIXELS.index(c)]
    }

    pub fn set(&mut self, c: SurfaceCoord, rgb: Rgb) {
        let i = Grid::PIXELS.index(c);
        self.px[i] = rgb;
    }

    /// Fills a rectangle given in face pixel coordinates, clipped to the face.
    pub fn fill_rect(&mut self, face: GlobalFace, u0: u16, v0: u16, w: u16, h: u16, rgb: Rgb) {
        let u1 = (u0 + w).min(FACE_PX);
        let v1 = (v0 + h).min(FACE_PX);
        for v in v0..v1 {
            for u in u0..u1 {
                self.set(SurfaceCoord::new(face, u, v), rgb);
            }
        }
    }

    pub fn fill_facet(&mut self, f: FacetAddress, rgb: Rgb) {
        self.fill_rect(
            f.face,
            u16::from(f.col) * FACET_PX,
            u16::from(f.row) * FACET_PX,
            FACET_PX,
            FACET_PX,
            rgb,
        );
    }

    /// The 128×128 block of `f` in its global face frame, row-major.
    pub fn facet_pixels(&self, f: FacetAddress) -> FacetBuffer {
        let mut buf = FacetBuffer::blank();
        for v in 0..FACET_PX {
            for u in 0..FACET_PX {
                let c = SurfaceCoord::new(
                    f.face,
                    u16::from(f.col) * FACET_PX + u,
                    u16::from(f.row) * FACET_PX + v,
                );
                buf.set(u, v, self.get(c));
            }
        }
        buf
    }
}

/// Pixels of one physical display, in the display's own frame.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct FacetBuffer {
    px: Vec<Rgb>,
}

impl std::fmt::Debug for FacetBuffer {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FacetBuffer").finish_non_exhaustive()
    }
}

impl FacetBuffer {
    pub fn blank() -> FacetBuffer {
        FacetBuffer {
            px: vec![[0; 3]; FACET_PX as usize * FACET_PX as usize],
        }
    }

    pub fn get(&self, u: u16, v: u16) -> Rgb {
        self.px[v as usize * FACET_PX as usize + u as usize]
    }

    pub fn set(&mut self, u: u16, v: u16, rgb: Rgb) {
        self.px[v as usize * FACET_PX as usize + u as usize] = rgb;
    }

    pub fn pixels(&self) -> &[Rgb] {
        &self.px
    }

    /// Packed RGB bytes, row-major.
    pub fn to_bytes(&self) -> Vec<u8> {
        self.px.iter().flatten().copied().collect()
    }

    pub fn digest(&self) -> u64 {
        crate::hash::fnv1a(&self.to_bytes())
    }
}

/// Output of [`render`]: one buffer per outward display, plus the facets
/// that have no display because their corner is empty.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rendered {
    pub buffers: BTreeMap<(CubioId, LocalFace), FacetBuffer>,
    pub missing: Vec<FacetAddress>,
}

/// Cuts the field into the per-display buffers of every cubio, rotating each
/// block into the display's own frame.
pub fn render(field: &Field, a: &Assembly) -> Rendered {
    let mut buffers = BTreeMap::new();
    for (id, p) in a.cubios() {
        for (lf, facet) in a.displays(id) {
            let local = GlobalFace::from_normal(Dir::from_index(lf).expect("face index"));
            let lfr = local.frame();
            let (ru, rv) = (p.rot.apply(lfr.u.vec()), p.rot.apply(lfr.v.vec()));
            let gfr = facet.face.frame();
            let (gu, gv) = (gfr.u.vec(), gfr.v.vec());
            let n = i32::from(FACET_PX);
            let mut buf = FacetBuffer::blank();
            for lv in 0..FACET_PX {
                for lu in 0..FACET_PX {
                    let ou = 2 * i32::from(lu) + 1 - n;
                    let ov = 2 * i32::from(lv) + 1 - n;
                    let a = ou * dot(ru, gu) + ov * dot(rv, gu);
                    let b = ou * dot(ru, gv) + ov * dot(rv, gv);
                    let c = SurfaceCoord::new(
                        facet.face,
                        (i32::from(facet.col) * n + (a + n - 1) / 2) as u16,
                        (i32::from(facet.row) * n + (b + n - 1) / 2) as u16,
                    );
                    buf.set(lu, lv, field.get(c));
                }
            }
            buffers.insert((id, lf), buf);
        }
    }
    let present = a.present_facets();
    let missing = FacetAddress::all()
        .filter(|f| !present[f.index()])
        .collect();
    Rendered { buffers, missing }
}

/// Moves every pixel of the turned layer with the layer.
pub fn transport_field(field: &Field, t: FaceTurn) -> Field {
    let g = Grid::PIXELS;
    let mut out = field.clone();
    for c in g.coords() {
        if g.moved_by(c, t) {
            out.set(g.transport(c, t), field.get(c));
        }
    }
    out
}

fn net_origin(face: GlobalFace) -> (usize, usize) {
    let s = FACE_PX as usize;
    match face {
        GlobalFace::U => (s, 0),
        GlobalFace::L => (0, s),
        GlobalFace::F => (s, s),
        GlobalFace::R => (2 * s, s),
        GlobalFace::B => (3 * s, s),
        GlobalFace::D => (s, 2 * s),
    }
}

/// Cross-layout cube net as binary PPM: U above F, D below F, L F R B in the
/// middle row; unused cells black.
pub fn write_net_ppm(field: &Field) -> Vec<u8> {
    let mut out = format!("P6\n{NET_WIDTH} {NET_HEIGHT}\n255\n").into_bytes();
    let header = out.len();
    out.resize(header + NET_WIDTH * NET_HEIGHT * 3, 0);
    for face in GlobalFace::ALL {
        let (x0, y0) = net_origin(face);
        for v in 0..FACE_PX {
            for u in 0..FACE_PX {
                let rgb = field.get(SurfaceCoord::new(face, u, v));
                let i = header + ((y0 + v as usize) * NET_WIDTH + x0 + u as usize) * 3;
                out[i..i + 3].copy_from_slice(&rgb);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{facet_permutation, new_standard_assembly, CoreKind};

    fn gradient() -> Field {
        let mut f = Field::uniform([0; 3]);
        for c in Grid::PIXELS.coords() {
            f.set(c, [c.u as u8, c.v as u8, c.face.index() as u8 * 40]);
        }
        f
    }

    #[test]
    fn uniform_field_renders_uniform_buffers() {
        let a = new_standard_assembly(CoreKind::SteelBall);
        let r = render(&Field::uniform([255, 0, 0]), &a);
        assert_eq!(r.buffers.len(), 24);
        assert!(r.missing.is_empty());
        assert!(r
            .buffers
            .values()
            .all(|b| b.pixels().iter().all(|&p| p == [255, 0, 0])));
    }

    #[test]
    fn identity_orientation_copies_subrectangles() {
        let a = new_standard_assembly(CoreKind::SteelBall);
        let field = gradient();
        let r = render(&field, &a);
        for (id, _) in a.cubios() {
            for (lf, facet) in a.displays(id) {
                assert_eq!(r.buffers[&(id, lf)], field.facet_pixels(facet));
            }
        }
    }

    #[test]
    fn buffers_follow_the_turn() {
        let a = new_standard_assembly(CoreKind::SteelBall);
        let field = gradient();
        let before = render(&field, &a);
        for t in crate::geometry::FaceTurn::all() {
            let b = a.apply_turn(t).unwrap();
            let after = render(&transport_field(&field, t), &b);
            assert_eq!(before.buffers, after.buffers, "{t}");
            // The moved displays sit exactly on the permuted facets.
            let perm = facet_permutation(t);
            for (id, _) in a.cubios() {
                let old: BTreeMap<_, _> = a.displays(id).into_iter().collect();
                for (lf, f) in b.displays(id) {
                    assert_eq!(perm.image(old[&lf]), f);
                }
            }
        }
    }

    #[test]
    fn missing_cubio_drops_three_buffers() {
        let mut a = new_standard_assembly(CoreKind::SteelBall);
        a.remove_cubio(CubioId(5)).unwrap();
        let r = render(&Field::uniform([1, 2, 3]), &a);
        assert_eq!(r.buffers.len(), 21);
        assert_eq!(r.missing.len(), 3);
    }

    #[test]
    fn net_header_and_size() {
        let ppm = write_net_ppm(&Field::uniform([9, 9, 9]));
        let header = b"P6\n1024 768\n255\n";
        assert_eq!(&ppm[..header.len()], header);
        assert_eq!(ppm.len(), header.len() + 1024 * 768 * 3);
        // Top-left corner is outside the net.
        assert_eq!(&ppm[header.len()..header.len() + 3], &[0, 0, 0]);
    }
}
