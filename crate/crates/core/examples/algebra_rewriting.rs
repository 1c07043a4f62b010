//! Normal forms in the preset algebras and in a custom presentation.

use ncq::algebra::{normal_form_with, parse_expression, parse_presentation, reduce_text, RewriteStrategy};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // one oscillator, [p, q] = -ih
    let ccr = parse_presentation("class ccr\nmodes 1\nparam h=1")?;
    for text in ["p q", "p p q", "(q + i p)(q - i p)"] {
        let x = reduce_text(text, &ccr)?;
        println!("ccr      {text:<22} = {}", ccr.poly_to_string(&x));
    }

    let boltzmann = parse_presentation("class boltzmann; modes 2")?;
    for text in ["A1 A1†", "A1 A2†", "(A1 + A1†)^4"] {
        let x = reduce_text(text, &boltzmann)?;
        println!("boltzmann {text:<21} = {}", boltzmann.poly_to_string(&x));
    }

    // the wrong-sign commutator: a a* = a* a - 1
    let custom = parse_presentation("gen a adj a*\nrule a a* -> a* a - 1")?;
    let x = parse_expression("a a a* a*", &custom)?;
    let left = normal_form_with(&x, &custom, RewriteStrategy::Leftmost)?;
    let right = normal_form_with(&x, &custom, RewriteStrategy::Rightmost)?;
    println!("custom   a a a* a*  leftmost  = {}", custom.poly_to_string(&left));
    println!("custom   a a a* a*  rightmost = {}", custom.poly_to_string(&right));
    println!("\ncanonical form of the custom presentation:\n{}", custom.to_dsl());
    Ok(())
}
