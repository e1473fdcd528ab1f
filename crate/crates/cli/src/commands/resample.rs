use std::io::Write;

use bfseg_core::bvol::{read_volume, write_volume};
use bfseg_core::resample::{resample_image, resample_label, resample_prob, Order, ResamplePlan};
use bfseg_core::{Kind, Mask, Spacing};

use crate::args::ResampleArgs;
use crate::CmdResult;

pub fn run(a: ResampleArgs, out: &mut dyn Write) -> CmdResult {
    let v = read_volume(&a.input)?;
    let [sx, sy, sz] = a.spacing.0;
    let order = Order::try_from(a.order)?;
    let plan = ResamplePlan::to_spacing(v.dims(), v.spacing(), Spacing::new(sx, sy, sz)?, order);
    let r = match v.kind() {
        Kind::Label => resample_label(&Mask::from_volume(v)?, &plan)?.into_volume(),
        Kind::Probability => resample_prob(&v, &plan)?,
        Kind::Image | Kind::Distance => resample_image(&v, &plan)?,
    };
    write_volume(&r, &a.out)?;
    writeln!(out, "{} -> {}", plan.src_dims, plan.dst_dims)?;
    Ok(())
}
