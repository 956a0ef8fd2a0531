//! Teacher and student loss terms on a tiny example, with gradients.

use firelabel::losses::{self, LossWeights, ProbMap, TempLogits};
use firelabel::raster::Raster;

fn main() -> firelabel::Result<()> {
    let target = Raster::from_vec(4, 1, vec![true, true, false, false])?;
    let pred = ProbMap::new(Raster::from_vec(4, 1, vec![0.9, 0.6, 0.2, 0.05])?)?;
    let w = LossWeights::default();

    let ce = losses::cross_entropy(&pred, &target)?;
    let dice = losses::dice_loss(&pred, &target, losses::DEFAULT_DICE_SMOOTH)?;
    println!("CE {ce:.5}  Dice {dice:.5}  teacher {:.5}", losses::teacher_loss(&pred, &target, &w)?);
    println!("dCE/dp   {:?}", losses::cross_entropy_grad(&pred, &target)?.as_slice());

    let logits = TempLogits::new(Raster::from_vec(4, 1, vec![1.2, 0.4, -2.0, -3.0])?)?;
    let temps = losses::scale_temperature(&logits, losses::DEFAULT_T_MAX);
    let gt = Raster::from_vec(4, 1, vec![380.0, 290.0, 40.0, 20.0])?;
    let fl1 = losses::flame_l1(&temps, &gt, &target)?;
    println!("predicted °C {:?}", temps.as_slice().iter().map(|t| (t * 10.0).round() / 10.0).collect::<Vec<_>>());
    println!("flame L1 {fl1:.3}  student total {:.3}", losses::student_total(ce, dice, fl1, &w));
    Ok(())
}
