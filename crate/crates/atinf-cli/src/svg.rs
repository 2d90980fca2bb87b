//! Static SVG for traces: the leaf path in the first coordinate plane and
//! log|z| against the trajectory parameter. No timestamps, so reruns are
//! byte-identical.

use atinf::trajectory::Trajectory;

const W: f64 = 420.0;
const H: f64 = 420.0;
const PAD: f64 = 40.0;

struct Frame {
    xmin: f64,
    xmax: f64,
    ymin: f64,
    ymax: f64,
}

impl Frame {
    fn of(points: impl Iterator<Item = (f64, f64)>) -> Frame {
        let mut f = Frame {
            xmin: f64::INFINITY,
            xmax: f64::NEG_INFINITY,
            ymin: f64::INFINITY,
            ymax: f64::NEG_INFINITY,
        };
        for (x, y) in points {
            if x.is_finite() && y.is_finite() {
                f.xmin = f.xmin.min(x);
                f.xmax = f.xmax.max(x);
                f.ymin = f.ymin.min(y);
                f.ymax = f.ymax.max(y);
            }
        }
        if !f.xmin.is_finite() {
            f = Frame {
                xmin: 0.0,
                xmax: 1.0,
                ymin: 0.0,
                ymax: 1.0,
            };
        }
        let dx = (f.xmax - f.xmin).max(1e-12);
        let dy = (f.ymax - f.ymin).max(1e-12);
        f.xmin -= 0.05 * dx;
        f.xmax += 0.05 * dx;
        f.ymin -= 0.05 * dy;
        f.ymax += 0.05 * dy;
        f
    }

    fn map(&self, x: f64, y: f64, x_off: f64) -> (f64, f64) {
        let sx = (W - 2.0 * PAD) / (self.xmax - self.xmin);
        let sy = (H - 2.0 * PAD) / (self.ymax - self.ymin);
        (
            x_off + PAD + (x - self.xmin) * sx,
            H - PAD - (y - self.ymin) * sy,
        )
    }
}

fn polyline(points: &[(f64, f64)], frame: &Frame, x_off: f64, color: &str) -> String {
    let coords: Vec<String> = points
        .iter()
        .map(|&(x, y)| {
            let (px, py) = frame.map(x, y, x_off);
            format!("{:.2},{:.2}", px, py)
        })
        .collect();
    format!(
        "<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.2\" points=\"{}\"/>",
        color,
        coords.join(" ")
    )
}

fn panel_box(x_off: f64, title: &str) -> String {
    format!(
        "<rect x=\"{:.1}\" y=\"{:.1}\" width=\"{:.1}\" height=\"{:.1}\" fill=\"none\" stroke=\"#888\"/>\
         <text x=\"{:.1}\" y=\"{:.1}\" font-family=\"monospace\" font-size=\"12\">{}</text>",
        x_off + PAD,
        PAD,
        W - 2.0 * PAD,
        H - 2.0 * PAD,
        x_off + PAD,
        PAD - 8.0,
        title
    )
}

pub fn trace_svg(traj: &Trajectory, config_line: &str) -> String {
    let states = traj.states();
    let path: Vec<(f64, f64)> = states.iter().map(|s| (s.x.re, s.x.im)).collect();
    let logz: Vec<(f64, f64)> = states
        .iter()
        .filter(|s| s.z.norm() > 0.0)
        .map(|s| (s.t, s.z.norm().ln()))
        .collect();
    let f1 = Frame::of(path.iter().copied());
    let f2 = Frame::of(logz.iter().copied());
    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\">\n",
        2.0 * W,
        H,
        2.0 * W,
        H
    ));
    svg.push_str(&format!("<!-- config: {} -->\n", config_line.replace("--", "- -")));
    svg.push_str(&panel_box(0.0, "leaf path: Re x vs Im x"));
    svg.push_str(&polyline(&path, &f1, 0.0, "#1b6ca8"));
    svg.push('\n');
    svg.push_str(&panel_box(W, "log |z| vs t"));
    svg.push_str(&polyline(&logz, &f2, W, "#a83232"));
    svg.push_str("\n</svg>\n");
    svg
}
