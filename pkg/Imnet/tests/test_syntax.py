from django.test import SimpleTestCase
from hypothesis import given, settings

from Imnet.services.errors import ParseError
from Imnet.services.syntax import (
    AddRules,
    Arith,
    Assign,
    BoolOp,
    Builtin,
    Cmp,
    ConstVal,
    Lambda,
    Lift,
    MakeRule,
    MixFst,
    Not,
    Once,
    Program,
    Proj,
    Register,
    Send,
    Seq,
    TupleExpr,
    Var,
    atomic_statements,
    check_program,
    parse_literal,
    parse_program,
    print_expr,
    print_program,
    print_statement,
    print_transformer,
    sequence,
    to_source,
)
from Imnet.services.values import (
    WILDCARD,
    Action,
    IpAddr,
    Nat,
    Pattern,
    Port,
    RuleList,
    SetValue,
    TupleValue,
)

from . import strategies
from .helpers import ID1, ID2, SCENARIOS, lambda_body, packet_one


class ParseProgramTests(SimpleTestCase):

    def test_example_one(self):
        program = parse_program((SCENARIOS / 'example1.imnet').read_text())
        self.assertEqual(program.defs, ())
        self.assertEqual([print_statement(s) for s in atomic_statements(program.body)], [
            'y := MakeRule(x)',
            'z := Lift(z, \\t -> (t, y))',
            'AddRules(z)',
            'Register',
        ])

    def test_example_two_definitions(self):
        program = parse_program((SCENARIOS / 'example2.imnet').read_text())
        self.assertEqual(len(program.defs), 1)
        self.assertEqual((program.defs[0].var, program.defs[0].query), ('y', 'SourceIps'))
        self.assertEqual(program.defs[0].line, 3)

    def test_statements_nest_to_the_right(self):
        program = parse_program('>>\nRegister;\nSend(x);\nAddRules(y);')
        self.assertEqual(program.body, Seq(Register(), Seq(Send('x'), AddRules('y'))))

    def test_block_nests_to_the_left(self):
        program = parse_program('>>\n{\n  Register;\n  Send(x);\n};\nAddRules(y);')
        self.assertEqual(program.body, Seq(Seq(Register(), Send('x')), AddRules('y')))

    def test_once_operands(self):
        program = parse_program('>>\na := Once(x, 3);\nb := Once(match(srcport=80), 1);')
        first, second = atomic_statements(program.body)
        self.assertEqual(first.transformer, Once(Var('x'), 3))
        self.assertEqual(second.transformer, Once(ConstVal(Pattern.of(srcport=80)), 1))

    def test_mix_initial_set_is_optional(self):
        program = parse_program('>>\na := MixFst(x, y);\nb := MixFst({@id1}, x, y);')
        first, second = atomic_statements(program.body)
        self.assertEqual(first.transformer, MixFst(SetValue(), 'x', 'y'))
        self.assertEqual(second.transformer, MixFst(SetValue((ID1,)), 'x', 'y'))

    def test_comments_are_ignored(self):
        self.assertEqual(parse_program('# nothing\n>> # here\nRegister; # done'),
                         Program((), Register()))


class ParseErrorTests(SimpleTestCase):

    def test_missing_separator_expects_it(self):
        with self.assertRaises(ParseError) as caught:
            parse_program('x := SwitchIds;\nRegister;')
        self.assertIn('>>', caught.exception.expected)

    def test_empty_file(self):
        with self.assertRaises(ParseError) as caught:
            parse_program('')
        self.assertEqual(caught.exception.line, 1)
        self.assertIn('>>', caught.exception.expected)

    def test_misspelled_keyword_is_located(self):
        with self.assertRaises(ParseError) as caught:
            parse_program('>>\ny := Once(1, 2);\nRegistr;')
        self.assertEqual(caught.exception.line, 3)
        self.assertIn(':=', caught.exception.expected)
        self.assertTrue(str(caught.exception).startswith('3:'))

    def test_keywords_are_reserved(self):
        for keyword in ('Lift', 'Register', 'port', 'and', 'sendall'):
            with self.subTest(keyword=keyword), self.assertRaises(ParseError):
                parse_program(f'>>\n{keyword} := Once(1, 2);')

    def test_names_containing_keywords_are_names(self):
        program = parse_program('>>\nports := Once(1, 2);')
        self.assertEqual(program.body.var, 'ports')

    def test_missing_semicolon(self):
        with self.assertRaises(ParseError) as caught:
            parse_program('>>\nRegister')
        self.assertIn(';', caught.exception.expected)

    def test_ill_typed_literal_is_a_parse_error(self):
        with self.assertRaises(ParseError) as caught:
            parse_literal('match(srcport=10.0.0.1)')
        self.assertEqual(caught.exception.code, 'parse-error')

    def test_unexpected_character(self):
        with self.assertRaises(ParseError) as caught:
            parse_program('>>\nx := Once(1, 2) $;')
        self.assertEqual(caught.exception.line, 2)


class ExpressionSyntaxTests(SimpleTestCase):

    def test_modulo_binds_tighter_than_sum(self):
        self.assertEqual(lambda_body('1 + 2 % 3'),
                         Arith('+', ConstVal(Nat(1)), Arith('%', ConstVal(Nat(2)), ConstVal(Nat(3)))))

    def test_subtraction_is_left_associative(self):
        self.assertEqual(lambda_body('a - b - c'),
                         Arith('-', Arith('-', Var('a'), Var('b')), Var('c')))

    def test_not_binds_tighter_than_and(self):
        self.assertEqual(lambda_body('not a and b'), BoolOp('and', Not(Var('a')), Var('b')))

    def test_and_binds_tighter_than_or(self):
        self.assertEqual(lambda_body('a or b and c'),
                         BoolOp('or', Var('a'), BoolOp('and', Var('b'), Var('c'))))

    def test_comparison(self):
        self.assertEqual(lambda_body('srcport(t) == 80'),
                         Cmp('==', Builtin('srcport', (Var('t'),)), ConstVal(Nat(80))))

    def test_projection_chain(self):
        self.assertEqual(lambda_body('t.0.1'), Proj(1, Proj(0, Var('t'))))

    def test_parentheses_group_or_build_tuples(self):
        self.assertEqual(lambda_body('(t)'), Var('t'))
        self.assertEqual(lambda_body('(t, y)'), TupleExpr((Var('t'), Var('y'))))

    def test_builtins(self):
        self.assertEqual(lambda_body('switch(port(t), z)'),
                         Builtin('switch', (Builtin('port', (Var('t'),)), Var('z'))))

    def test_printer_parenthesizes_only_when_needed(self):
        self.assertEqual(print_expr(Arith('-', Var('a'), Arith('-', Var('b'), Var('c')))), 'a - (b - c)')
        self.assertEqual(print_expr(Arith('-', Arith('-', Var('a'), Var('b')), Var('c'))), 'a - b - c')
        self.assertEqual(print_expr(Not(BoolOp('or', Var('a'), Var('b')))), 'not (a or b)')
        self.assertEqual(print_expr(Proj(0, Arith('+', Var('a'), Var('b')))), '(a + b).0')


class LiteralTests(SimpleTestCase):

    def test_rule_triple(self):
        self.assertEqual(parse_literal('(match(srcport=80), sendall, _)'),
                         TupleValue((Pattern.of(srcport=80), Action.send_all(), WILDCARD)))

    def test_scalars(self):
        self.assertEqual(parse_literal('port:3'), Port(3))
        self.assertEqual(parse_literal('10.0.0.1'), IpAddr.parse('10.0.0.1'))
        self.assertEqual(parse_literal('match()'), Pattern())
        self.assertEqual(parse_literal('sendout(2)'), Action.send_out(2))
        self.assertEqual(parse_literal('change(srcip, 10.0.0.9)'),
                         Action.change('srcip', IpAddr.parse('10.0.0.9')))

    def test_set(self):
        self.assertEqual(parse_literal('{@id1, @id2}'), SetValue((ID1, ID2)))
        self.assertEqual(parse_literal('{}'), SetValue())

    def test_values_without_literal_form(self):
        for value in (packet_one(), RuleList()):
            with self.subTest(value=value), self.assertRaises(ValueError):
                to_source(value)

    @given(strategies.scalars)
    @settings(max_examples=200, deadline=None)
    def test_scalar_source_parses_back(self, value):
        self.assertEqual(parse_literal(to_source(value)), value)


class PrintTests(SimpleTestCase):

    def test_minimal_program(self):
        self.assertEqual(print_program(Program((), Register())), '>>\nRegister;')

    def test_blocks_are_indented(self):
        body = Seq(Register(), Seq(Seq(Send('x'), Seq(Register(), AddRules('y'))), Register()))
        self.assertEqual(print_program(Program((), body)),
                         '>>\nRegister;\n{\n  Send(x);\n  Register;\n  AddRules(y);\n};\nRegister;')

    def test_canonical_text_is_a_fixed_point(self):
        text = print_program(parse_program((SCENARIOS / 'example2.imnet').read_text()))
        self.assertEqual(print_program(parse_program(text)), text)

    def test_labels(self):
        self.assertEqual(print_statement(Assign('y', MakeRule('x'))), 'y := MakeRule(x)')
        self.assertEqual(print_transformer(MixFst(SetValue(), 'a', 'b')), 'MixFst(a, b)')
        self.assertEqual(print_transformer(MixFst(SetValue((ID1,)), 'a', 'b')), 'MixFst({@id1}, a, b)')
        self.assertEqual(print_transformer(Lift('z', Lambda('t', TupleExpr((Var('t'), Var('y')))))),
                         'Lift(z, \\t -> (t, y))')

    def test_sequence_helpers(self):
        body = sequence([Register(), Send('x'), AddRules('y')])
        self.assertEqual(body, Seq(Register(), Seq(Send('x'), AddRules('y'))))
        self.assertEqual(atomic_statements(Seq(Seq(Register(), Send('x')), AddRules('y'))),
                         [Register(), Send('x'), AddRules('y')])
        with self.assertRaises(ValueError):
            sequence([])

    @given(strategies.programs)
    @settings(max_examples=300, deadline=None)
    def test_parse_inverts_print(self, program):
        self.assertEqual(parse_program(print_program(program)), program)


class CheckProgramTests(SimpleTestCase):

    def test_clean_program(self):
        program = parse_program((SCENARIOS / 'example2.imnet').read_text())
        self.assertEqual(check_program(program), [])

    def test_duplicate_and_unknown(self):
        program = parse_program('a := SwitchIds;\na := Bogus;\n>>\nRegister;')
        diagnostics = check_program(program)
        self.assertEqual([(d.line, d.column) for d in diagnostics], [(2, 1), (2, 1)])
        self.assertIn("'a' is defined more than once", diagnostics[0].message)
        self.assertEqual(str(diagnostics[1]), "2:1: unknown query 'Bogus'")

    def test_custom_queries(self):
        program = parse_program('a := Flows;\n>>\nRegister;')
        self.assertEqual(check_program(program, known_queries=['Flows']), [])
