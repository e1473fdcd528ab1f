pub mod evaluate;
pub mod loss_eval;
pub mod resample;
pub mod stage1;
pub mod stage2;
pub mod synth;
pub mod uam_fit;
