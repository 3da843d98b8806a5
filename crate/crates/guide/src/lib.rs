//! The mdbook guide under `book/`, compiled so that its snippets run as
//! doc-tests.
#![doc = include_str!("../../../book/src/intro.md")]

#[doc = include_str!("../../../book/src/quadrature.md")]
pub mod quadrature {}

#[doc = include_str!("../../../book/src/closed-form-laws.md")]
pub mod closed_form_laws {}

#[doc = include_str!("../../../book/src/meander.md")]
pub mod meander {}

#[doc = include_str!("../../../book/src/excursion.md")]
pub mod excursion {}

#[doc = include_str!("../../../book/src/elastic.md")]
pub mod elastic {}

#[doc = include_str!("../../../book/src/feynman-kac.md")]
pub mod feynman_kac {}

#[doc = include_str!("../../../book/src/monte-carlo.md")]
pub mod monte_carlo {}

#[doc = include_str!("../../../book/src/goodness-of-fit.md")]
pub mod goodness_of_fit {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
